//! Dense symmetric operators, Cholesky factors, and the SPD Hessian
//! approximation with a maintained inverse.
//!
//! [`SpdState`] keeps `G`, `G⁻¹` and `diag(G)` consistent under symmetric
//! rank-two modifications `G + c11·ppᵀ + c12·(pqᵀ + qpᵀ) + c22·qqᵀ`. The
//! inverse is advanced with the Woodbury identity through a 2×2
//! capacitance block, so every Broyden-family member costs O(n²). Every
//! [`AUDIT_INTERVAL`] updates the residual `max|G·G⁻¹ − I|` is recomputed,
//! and the inverse is rebuilt from a fresh factorization when it exceeds
//! [`DRIFT_LIMIT`].

use std::io::{self, Write};

use crate::error::{check_dim, Error, Result};
use crate::linalg::dot;

/// Number of maintained updates (rank-two updates and rescales) between two
/// drift audits.
pub const AUDIT_INTERVAL: u64 = 50;

/// Guaranteed bound on `max|G·G⁻¹ − I|`.
pub const DRIFT_LIMIT: f64 = 1e-6;

/// Audited drift above which the inverse is rebuilt. Drift compounds between
/// audits, so this sits well below [`DRIFT_LIMIT`].
pub const REBUILD_THRESHOLD: f64 = 1e-9;

/// Relative pivot threshold of the Cholesky factorization.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Relative threshold on the capacitance determinant.
pub const CAPACITANCE_TOLERANCE: f64 = 1e-14;

/// A real symmetric `n × n` matrix with full row-major storage.
///
/// Construction checks exact symmetry and finiteness; the crate-internal
/// mutators keep both.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        check_dim(n * n, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds the matrix from its upper triangle; `f(i, j)` is called for `j >= i`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::new(n, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        assert!(n > 0, "dimension must be positive");
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = c;
        }
        Self { n, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Returns `self · u`.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, u.len())?;
        Ok((0..self.n).map(|i| dot(self.row(i), u)).collect())
    }

    /// Returns `⟨self · u, u⟩`.
    pub fn quad_form(&self, u: &[f64]) -> Result<f64> {
        let mu = self.apply(u)?;
        Ok(dot(&mu, u))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// Entrywise `self − other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Plain `self · other` as a row-major buffer (the product of two
    /// symmetric matrices is not symmetric in general).
    pub fn matmul(&self, other: &Self) -> Result<Vec<f64>> {
        check_dim(self.n, other.n)?;
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Writes whitespace-separated rows with 17 significant digits.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = M`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
}

/// Cholesky factorization; fails when a pivot drops below
/// `1e-14 · max_i M_ii`.
pub fn factorize(m: &DenseSymmetric) -> Result<CholeskyFactor> {
    let n = m.dim();
    let max_diag = (0..n).fold(0.0_f64, |acc, i| acc.max(m.get(i, i)));
    let threshold = PIVOT_TOLERANCE * max_diag;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            pivot -= l[j * n + k] * l[j * n + k];
        }
        if !(pivot > threshold) {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let d = pivot.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(CholeskyFactor { n, lower: l })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// Solves `L y = b` in place.
    pub fn forward_substitute(&self, b: &mut [f64]) -> Result<()> {
        check_dim(self.n, b.len())?;
        let n = self.n;
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s = b[i] - dot(row, &b[..i]);
            b[i] = s / self.lower[i * n + i];
        }
        Ok(())
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn backward_substitute(&self, y: &mut [f64]) -> Result<()> {
        check_dim(self.n, y.len())?;
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.lower[k * n + i] * y[k];
            }
            y[i] = s / self.lower[i * n + i];
        }
        Ok(())
    }

    /// Solves `M x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        self.forward_substitute(&mut x)?;
        self.backward_substitute(&mut x)?;
        Ok(x)
    }

    /// Dense `M⁻¹`, symmetrized by averaging mirrored entries.
    pub fn inverse(&self) -> DenseSymmetric {
        let n = self.n;
        let mut cols = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let x = self.solve(&e).expect("dimension checked");
            for i in 0..n {
                cols[i * n + j] = x[i];
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (cols[i * n + j] + cols[j * n + i]);
                cols[i * n + j] = v;
                cols[j * n + i] = v;
            }
        }
        DenseSymmetric { n, data: cols }
    }

    /// `L · Lᵀ`.
    pub fn reconstruct(&self) -> DenseSymmetric {
        let n = self.n;
        DenseSymmetric::from_fn(n, |i, j| {
            let k_max = i.min(j);
            (0..=k_max).map(|k| self.lower(i, k) * self.lower(j, k)).sum()
        })
        .expect("finite factor")
    }

    /// `L⁻¹ · M · L⁻ᵀ` for a symmetric `M`.
    pub fn congruence(&self, m: &DenseSymmetric) -> Result<DenseSymmetric> {
        check_dim(self.n, m.dim())?;
        let n = self.n;
        // X = L⁻¹M column by column; since M is symmetric, L⁻¹MLᵀ⁻¹ = L⁻¹Xᵀ.
        let mut tmp = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = m.get(i, j);
            }
            self.forward_substitute(&mut col)?;
            for i in 0..n {
                tmp[j * n + i] = col[i];
            }
        }
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                col[i] = tmp[i * n + j];
            }
            self.forward_substitute(&mut col)?;
            for i in 0..n {
                out[i * n + j] = col[i];
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (out[i * n + j] + out[j * n + i]);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        DenseSymmetric::new(n, out)
    }
}

/// An SPD approximation `G` with its maintained inverse and diagonal cache.
#[derive(Debug, Clone)]
pub struct SpdState {
    g: DenseSymmetric,
    g_inv: DenseSymmetric,
    diag: Vec<f64>,
    update_count: u64,
    since_audit: u64,
    drift: f64,
}

impl SpdState {
    /// Factorizes `g` and inverts it densely.
    pub fn new(g: DenseSymmetric) -> Result<Self> {
        let g_inv = factorize(&g)?.inverse();
        let diag = g.diagonal();
        let mut state = Self {
            g,
            g_inv,
            diag,
            update_count: 0,
            since_audit: 0,
            drift: 0.0,
        };
        state.drift = state.residual();
        Ok(state)
    }

    /// `c · I` with exact inverse `I / c`.
    pub fn scaled_identity(n: usize, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NonPositiveScale(c));
        }
        Ok(Self {
            g: DenseSymmetric::scaled_identity(n, c),
            g_inv: DenseSymmetric::scaled_identity(n, 1.0 / c),
            diag: vec![c; n],
            update_count: 0,
            since_audit: 0,
            drift: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn g(&self) -> &DenseSymmetric {
        &self.g
    }

    pub fn g_inv(&self) -> &DenseSymmetric {
        &self.g_inv
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    /// Residual recorded at the last audit.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Returns `G⁻¹ · rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.g_inv.apply(rhs)
    }

    /// `G ← G + c11·ppᵀ + c12·(pqᵀ + qpᵀ) + c22·qqᵀ` with the inverse
    /// advanced by Woodbury. On error the state is left untouched.
    pub fn rank2_update(&mut self, p: &[f64], q: &[f64], c11: f64, c12: f64, c22: f64) -> Result<()> {
        let n = self.dim();
        check_dim(n, p.len())?;
        check_dim(n, q.len())?;
        if ![c11, c12, c22].iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite);
        }
        if c11 == 0.0 && c12 == 0.0 && c22 == 0.0 {
            return Ok(());
        }

        let hp = self.g_inv.apply(p)?;
        let hq = self.g_inv.apply(q)?;
        let w11 = dot(p, &hp);
        let w22 = dot(q, &hq);
        let w12 = 0.5 * (dot(p, &hq) + dot(q, &hp));

        // K = I + C·W
        let k11 = 1.0 + c11 * w11 + c12 * w12;
        let k12 = c11 * w12 + c12 * w22;
        let k21 = c12 * w11 + c22 * w12;
        let k22 = 1.0 + c12 * w12 + c22 * w22;
        let det = k11 * k22 - k12 * k21;
        let scale = (k11 * k11 + k12 * k12).sqrt() * (k21 * k21 + k22 * k22).sqrt();
        if !(det > CAPACITANCE_TOLERANCE * scale) || !det.is_finite() {
            return Err(Error::SingularCapacitance { det });
        }

        // D = K⁻¹·C, symmetric in exact arithmetic.
        let d11 = (k22 * c11 - k12 * c12) / det;
        let d12a = (k22 * c12 - k12 * c22) / det;
        let d21a = (-k21 * c11 + k11 * c12) / det;
        let d22 = (-k21 * c12 + k11 * c22) / det;
        let d12 = 0.5 * (d12a + d21a);

        let g = self.g.data_mut();
        for i in 0..n {
            for j in i..n {
                let v = g[i * n + j] + c11 * p[i] * p[j] + c12 * (p[i] * q[j] + q[i] * p[j]) + c22 * q[i] * q[j];
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        let h = self.g_inv.data_mut();
        for i in 0..n {
            for j in i..n {
                let v = h[i * n + j]
                    - (d11 * hp[i] * hp[j] + d12 * (hp[i] * hq[j] + hq[i] * hp[j]) + d22 * hq[i] * hq[j]);
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        for i in 0..n {
            self.diag[i] = self.g.get(i, i);
        }

        self.update_count += 1;
        self.count_maintained()
    }

    /// `G ← c·G`, `G⁻¹ ← G⁻¹/c`.
    pub fn rescale(&mut self, c: f64) -> Result<()> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NonPositiveScale(c));
        }
        if c == 1.0 {
            return Ok(());
        }
        self.g.data_mut().iter_mut().for_each(|v| *v *= c);
        self.g_inv.data_mut().iter_mut().for_each(|v| *v /= c);
        for i in 0..self.dim() {
            self.diag[i] = self.g.get(i, i);
        }
        self.count_maintained()
    }

    fn count_maintained(&mut self) -> Result<()> {
        self.since_audit += 1;
        if self.since_audit >= AUDIT_INTERVAL {
            self.audit()?;
        }
        Ok(())
    }

    /// Recomputes the drift and rebuilds the inverse when it exceeds
    /// [`REBUILD_THRESHOLD`]. Returns the drift measured before any rebuild.
    pub fn audit(&mut self) -> Result<f64> {
        self.since_audit = 0;
        let drift = self.residual();
        if !(drift <= REBUILD_THRESHOLD) {
            self.refactorize()?;
        } else {
            self.drift = drift;
        }
        Ok(drift)
    }

    /// Rebuilds `G⁻¹` from a fresh factorization of `G`.
    pub fn refactorize(&mut self) -> Result<()> {
        self.g_inv = factorize(&self.g)?.inverse();
        self.drift = self.residual();
        Ok(())
    }

    /// `max|G·G⁻¹ − I|`, O(n³).
    pub fn residual(&self) -> f64 {
        let n = self.dim();
        let prod = self.g.matmul(&self.g_inv).expect("same dimension");
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let r = (prod[i * n + j] - target).abs();
                worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
            }
        }
        worst
    }
}
