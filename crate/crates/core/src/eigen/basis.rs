use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{largest_eigenpairs, EigSolveConfig};
use crate::error::{check_dim, Error, Result};
use crate::graph::{DeflatedSignless, NormalizedAdjacency};
use crate::scalar::{cast, Scalar};

const MAGIC: &[u8; 4] = b"PGSB";
const VERSION: u32 = 1;

/// The trivial eigenvector and the `r` smallest nonzero eigenpairs of the
/// normalized Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis<T> {
    u0: Array1<T>,
    lambda: Array1<T>,
    vectors: Array2<T>,
    tol: f64,
    residuals: Vec<T>,
}

impl<T: Scalar> SpectralBasis<T> {
    /// Assembles a basis, checking shapes and that `lambda` is ascending and
    /// strictly positive.
    pub fn from_parts(
        u0: Array1<T>,
        lambda: Array1<T>,
        vectors: Array2<T>,
        tol: f64,
        residuals: Vec<T>,
    ) -> Result<Self> {
        let (n, r) = vectors.dim();
        check_dim("spectral basis u0", n, u0.len())?;
        check_dim("spectral basis eigenvalues", r, lambda.len())?;
        check_dim("spectral basis residuals", r, residuals.len())?;
        if r == 0 {
            return Err(Error::InvalidArgument(
                "spectral basis needs rank >= 1".into(),
            ));
        }
        if lambda.windows(2).into_iter().any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be ascending".into(),
            ));
        }
        if !(lambda[0] > T::zero()) {
            return Err(Error::NumericallyDisconnected {
                lambda1: lambda[0].to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            u0,
            lambda,
            vectors,
            tol,
            residuals,
        })
    }

    pub fn n(&self) -> usize {
        self.u0.len()
    }

    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    pub fn u0(&self) -> &Array1<T> {
        &self.u0
    }

    /// `lambda_1 <= ... <= lambda_r`.
    pub fn lambda(&self) -> &Array1<T> {
        &self.lambda
    }

    /// `U_r`, columns matching [`Self::lambda`].
    pub fn vectors(&self) -> &Array2<T> {
        &self.vectors
    }

    /// Smallest nonzero eigenvalue `lambda_1`.
    pub fn eigengap(&self) -> T {
        self.lambda[0]
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `|L_sym u_i - lambda_i u_i|` per column.
    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    /// Keeps the first `r` eigenpairs.
    pub fn truncated(&self, r: usize) -> Result<Self> {
        if r == 0 || r > self.rank() {
            return Err(Error::RankTooLarge {
                rank: r,
                max: self.rank(),
            });
        }
        Ok(Self {
            u0: self.u0.clone(),
            lambda: self.lambda.slice(ndarray::s![..r]).to_owned(),
            vectors: self.vectors.slice(ndarray::s![.., ..r]).to_owned(),
            tol: self.tol,
            residuals: self.residuals[..r].to_vec(),
        })
    }

    /// Flips the sign of column `i` of `U_r` (used by invariance tests).
    pub fn with_flipped_column(mut self, i: usize) -> Self {
        self.vectors.column_mut(i).mapv_inplace(|v| -v);
        self
    }

    /// Little-endian container: magic, version, dtype tag, `n`, `r`, `tol`,
    /// then `lambda`, `u0`, `U_r` column-major and residuals, all as `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let mut tag = [0u8; 8];
        tag[..T::TAG.len()].copy_from_slice(T::TAG.as_bytes());
        w.write_all(&tag)?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        w.write_all(&(self.rank() as u64).to_le_bytes())?;
        w.write_all(&self.tol.to_le_bytes())?;
        let put = |w: &mut W, v: T| w.write_all(&v.to_f64().unwrap_or(f64::NAN).to_le_bytes());
        for &v in &self.lambda {
            put(&mut w, v)?;
        }
        for &v in &self.u0 {
            put(&mut w, v)?;
        }
        for col in self.vectors.columns() {
            for &v in col {
                put(&mut w, v)?;
            }
        }
        for &v in &self.residuals {
            put(&mut w, v)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a spectral basis container".into()));
        }
        let version = u32::from_le_bytes(read_array(&mut r)?);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let tag: [u8; 8] = read_array(&mut r)?;
        let tag = std::str::from_utf8(&tag)
            .map_err(|_| Error::Format("bad dtype tag".into()))?
            .trim_end_matches('\0');
        if tag != T::TAG {
            return Err(Error::Format(format!(
                "container holds {tag} data, {} requested",
                T::TAG
            )));
        }
        let n = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let rank = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let tol = f64::from_le_bytes(read_array(&mut r)?);
        let mut take = |len: usize| -> Result<Vec<T>> {
            (0..len)
                .map(|_| Ok(cast::<T>(f64::from_le_bytes(read_array(&mut r)?))))
                .collect()
        };
        let lambda = Array1::from(take(rank)?);
        let u0 = Array1::from(take(n)?);
        let flat = take(n * rank)?;
        let vectors = Array2::from_shape_vec((rank, n), flat)
            .map_err(|e| Error::Format(e.to_string()))?
            .reversed_axes()
            .as_standard_layout()
            .to_owned();
        let residuals = take(rank)?;
        Self::from_parts(u0, lambda, vectors, tol, residuals)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated container".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

/// Computes `u0` and the `r` smallest nonzero Laplacian eigenpairs from the
/// largest eigenpairs of the deflated signless operator, `lambda_i = 2 - mu`.
pub fn spectral_basis<T: Scalar>(
    op: &NormalizedAdjacency<'_, T>,
    r: usize,
    cfg: &EigSolveConfig,
) -> Result<SpectralBasis<T>> {
    spectral_basis_with_stats(op, r, cfg).map(|(basis, _)| basis)
}

/// Operator applications and restarts spent by the Krylov solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub matvecs: usize,
    pub restarts: usize,
}

/// [`spectral_basis`] together with the solver's work counters.
pub fn spectral_basis_with_stats<T: Scalar>(
    op: &NormalizedAdjacency<'_, T>,
    r: usize,
    cfg: &EigSolveConfig,
) -> Result<(SpectralBasis<T>, SolveStats)> {
    let n = op.dim();
    if r == 0 || r + 1 > n {
        return Err(Error::RankTooLarge {
            rank: r,
            max: n.saturating_sub(1),
        });
    }
    let u0 = op.unit_degree_vector();
    let deflated = DeflatedSignless::new(op, u0.clone())?;
    let pairs = largest_eigenpairs(&deflated, r, cfg, Some(u0.view()))?;
    let two = T::one() + T::one();
    let lambda = pairs.values.mapv(|mu| two - mu);
    let residuals = pairs
        .residuals
        .iter()
        .zip(&pairs.values)
        .map(|(&res, &mu)| res * mu.abs().max(T::one()))
        .collect();
    if lambda[0].to_f64().is_some_and(|l| l <= cfg.tol) {
        return Err(Error::NumericallyDisconnected {
            lambda1: lambda[0].to_f64().unwrap_or(f64::NAN),
        });
    }
    let stats = SolveStats {
        matvecs: pairs.matvecs,
        restarts: pairs.restarts,
    };
    let basis = SpectralBasis::from_parts(u0, lambda, pairs.vectors, cfg.tol, residuals)?;
    Ok((basis, stats))
}
