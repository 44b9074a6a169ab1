use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

const MAGIC: &[u8; 4] = b"PGCK";
const VERSION: u32 = 1;

/// Weights of the two-layer network: one matrix per filter part and layer,
/// plus one bias per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    /// `W^(1,k)`, each `d x h`.
    pub w1: [Array2<T>; 3],
    pub b1: Array1<T>,
    /// `W^(2,k)`, each `h x m`.
    pub w2: [Array2<T>; 3],
    pub b2: Array1<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(d: usize, h: usize, m: usize) -> Self {
        Self {
            w1: std::array::from_fn(|_| Array2::zeros((d, h))),
            b1: Array1::zeros(h),
            w2: std::array::from_fn(|_| Array2::zeros((h, m))),
            b2: Array1::zeros(m),
        }
    }

    /// `(d, h, m)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        let (d, h) = self.w1[0].dim();
        (d, h, self.w2[0].ncols())
    }

    pub fn zeros_like(&self) -> Self {
        let (d, h, m) = self.dims();
        Self::zeros(d, h, m)
    }

    /// All eight tensors as flat slices in a fixed order, flagged `true` for
    /// weight matrices and `false` for biases.
    pub fn tensors(&self) -> Vec<(&[T], bool)> {
        let mut out: Vec<(&[T], bool)> = Vec::with_capacity(8);
        out.extend(
            self.w1
                .iter()
                .map(|w| (w.as_slice().expect("standard layout"), true)),
        );
        out.push((self.b1.as_slice().expect("contiguous"), false));
        out.extend(
            self.w2
                .iter()
                .map(|w| (w.as_slice().expect("standard layout"), true)),
        );
        out.push((self.b2.as_slice().expect("contiguous"), false));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&mut [T], bool)> {
        let mut out: Vec<(&mut [T], bool)> = Vec::with_capacity(8);
        out.extend(
            self.w1
                .iter_mut()
                .map(|w| (w.as_slice_mut().expect("standard layout"), true)),
        );
        out.push((self.b1.as_slice_mut().expect("contiguous"), false));
        out.extend(
            self.w2
                .iter_mut()
                .map(|w| (w.as_slice_mut().expect("standard layout"), true)),
        );
        out.push((self.b2.as_slice_mut().expect("contiguous"), false));
        out
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(t, _)| t.iter().all(|v| v.is_finite()))
    }

    /// Shapes followed by every tensor, little-endian `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let (d, h, m) = self.dims();
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let mut tag = [0u8; 8];
        tag[..T::TAG.len()].copy_from_slice(T::TAG.as_bytes());
        w.write_all(&tag)?;
        for dim in [d, h, m] {
            w.write_all(&(dim as u64).to_le_bytes())?;
        }
        for (t, _) in self.tensors() {
            for &v in t {
                w.write_all(&v.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 16];
        read_exact(&mut r, &mut head)?;
        if &head[..4] != MAGIC {
            return Err(Error::Format("not a model checkpoint".into()));
        }
        let version = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let tag = std::str::from_utf8(&head[8..16])
            .map_err(|_| Error::Format("bad dtype tag".into()))?
            .trim_end_matches('\0');
        if tag != T::TAG {
            return Err(Error::Format(format!(
                "checkpoint holds {tag}, {} requested",
                T::TAG
            )));
        }
        let mut dims = [0usize; 3];
        for dim in &mut dims {
            let mut b = [0u8; 8];
            read_exact(&mut r, &mut b)?;
            *dim = u64::from_le_bytes(b) as usize;
        }
        let [d, h, m] = dims;
        let mut params = Self::zeros(d, h, m);
        for (t, _) in params.tensors_mut() {
            for v in t.iter_mut() {
                let mut b = [0u8; 8];
                read_exact(&mut r, &mut b)?;
                *v = cast(f64::from_le_bytes(b));
            }
        }
        Ok(params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated checkpoint".into()),
        _ => Error::Io(e),
    })
}

/// Glorot-uniform weights and zero biases from a fresh generator.
pub fn init_params<T: Scalar>(d: usize, h: usize, m: usize, seed: u64) -> ModelParams<T> {
    init_params_with(d, h, m, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Glorot-uniform weights, drawn in the order `W^(1,1..3)`, `W^(2,1..3)`,
/// each row-major; biases zero.
pub fn init_params_with<T: Scalar>(
    d: usize,
    h: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> ModelParams<T> {
    let mut params = ModelParams::zeros(d, h, m);
    let glorot = |w: &mut Array2<T>, rng: &mut ChaCha8Rng| {
        let (rows, cols) = w.dim();
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        w.mapv_inplace(|_| cast(rng.gen_range(-bound..bound)));
    };
    for w in params.w1.iter_mut().chain(params.w2.iter_mut()) {
        glorot(w, rng);
    }
    params
}

/// `mu_k = (mean |W^(1,k)| + mean |W^(2,k)|) / 2` for the three filter parts.
pub fn weight_magnitude_analysis<T: Scalar>(params: &ModelParams<T>) -> [f64; 3] {
    let mean_abs = |w: &Array2<T>| {
        w.iter()
            .map(|v| v.abs().to_f64().unwrap_or(f64::NAN))
            .sum::<f64>()
            / w.len() as f64
    };
    std::array::from_fn(|k| 0.5 * (mean_abs(&params.w1[k]) + mean_abs(&params.w2[k])))
}
