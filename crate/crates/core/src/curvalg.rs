//! Pointwise algebra of the F-Weingarten operator `S_F = A_F · S`.
//!
//! `σ_r` is the plain elementary symmetric function of the anisotropic
//! principal curvatures (no binomial prefactor) and `H_r = σ_r / C(n, r)`,
//! so that `(r+1)·σ_{r+1} = b_r·H_{r+1}` with `b_r = (r+1)·C(n, r+1)`.
//! Newton operators satisfy `P_0 = Id`, `P_r = σ_r Id - P_{r-1} S_F`; they
//! are polynomials in `S_F`, and `T_r = P_r A_F` is symmetric.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest dimension handled by the permutation-symbol routines.
pub const MAX_DIM: usize = 8;
/// Largest dimension for which [`newton_ops`] cross-checks against the
/// permutation-symbol definition.
pub const MAX_EPS_NEWTON_DIM: usize = 5;

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `b_j = (j+1)·C(n, j+1)`.
pub fn b_coeff(n: usize, j: usize) -> f64 {
    (j + 1) as f64 * binomial(n, j + 1)
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// `S_F = A_F · S`.
pub fn sf_operator(a_f: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a_f.nrows();
    if a_f.shape() != (n, n) || s.shape() != (n, n) {
        return Err(Error::InputDomain("A_F and S must be square of equal size".into()));
    }
    if asymmetry(a_f) > 1e-10 * a_f.amax().max(1.0) {
        return Err(Error::InputDomain("A_F is not symmetric".into()));
    }
    if asymmetry(s) > 1e-8 * s.amax().max(1.0) {
        return Err(Error::InputDomain("S is not symmetric".into()));
    }
    if a_f.clone().cholesky().is_none() {
        return Err(Error::ConvexityViolation("A_F is not positive definite".into()));
    }
    Ok(a_f * s)
}

/// Calls `visit(subset)` for every increasing `r`-subset of `0..n`.
fn for_each_subset(n: usize, r: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..r).collect();
    if r > n {
        return;
    }
    loop {
        visit(&idx);
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - r + i {
                idx[i] += 1;
                for j in i + 1..r {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return;
            }
        }
    }
}

/// All permutations of `0..r` with their signs (Heap's algorithm).
fn permutations(r: usize) -> Vec<(Vec<usize>, f64)> {
    let mut a: Vec<usize> = (0..r).collect();
    let mut out = vec![(a.clone(), 1.0)];
    let mut c = vec![0usize; r];
    let mut sign = 1.0;
    let mut i = 1;
    while i < r {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Sign of the permutation taking sequence `from` to sequence `to` (same set).
fn sequence_sign(from: &[usize], to: &[usize]) -> f64 {
    let mut perm: Vec<usize> = to.iter().map(|t| from.iter().position(|f| f == t).unwrap()).collect();
    let mut sign = 1.0;
    for i in 0..perm.len() {
        while perm[i] != i {
            let j = perm[i];
            perm.swap(i, j);
            sign = -sign;
        }
    }
    sign
}

fn check_square(s_f: &DMatrix<f64>) -> Result<usize> {
    let n = s_f.nrows();
    if s_f.ncols() != n {
        return Err(Error::InputDomain("S_F must be square".into()));
    }
    if n == 0 || n > MAX_DIM {
        return Err(Error::OutOfRange { value: n, range: format!("1..={MAX_DIM}") });
    }
    Ok(n)
}

/// `σ_r` from the permutation-symbol sum.
///
/// The sum over ordered index tuples `(i_1..i_r)` and `(j_1..j_r)` is
/// nonzero only when both enumerate the same set; the `r!` orderings of the
/// row tuple contribute identically, which cancels the `1/r!`. What remains
/// is the signed sum over permutations of each `r`-subset.
pub fn sigma_eps(s_f: &DMatrix<f64>, r: usize) -> Result<f64> {
    let n = check_square(s_f)?;
    if r > n {
        return Err(Error::OutOfRange { value: r, range: format!("0..={n}") });
    }
    if r == 0 {
        return Ok(1.0);
    }
    let perms = permutations(r);
    let mut total = 0.0;
    for_each_subset(n, r, |set| {
        for (p, sign) in &perms {
            let mut prod = *sign;
            for k in 0..r {
                prod *= s_f[(set[k], set[p[k]])];
            }
            total += prod;
        }
    });
    Ok(total)
}

/// `σ_0..σ_n` from the characteristic polynomial (Faddeev–LeVerrier).
pub fn sigma_charpoly(s_f: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = check_square(s_f)?;
    let id = DMatrix::<f64>::identity(n, n);
    // det(λI - S_F) = Σ_k c_k λ^k
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = s_f * &m + &id * c[n - k + 1];
        c[n - k] = -(s_f * &m).trace() / k as f64;
    }
    Ok((0..=n).map(|r| if r % 2 == 0 { c[n - r] } else { -c[n - r] }).collect())
}

/// `P_0..P_{n-1}` via `P_r = σ_r Id - P_{r-1} S_F`.
pub fn newton_recurrence(s_f: &DMatrix<f64>, sigma: &[f64]) -> Vec<DMatrix<f64>> {
    let n = s_f.nrows();
    let mut out = Vec::with_capacity(n);
    out.push(DMatrix::identity(n, n));
    for r in 1..n {
        let next = DMatrix::identity(n, n) * sigma[r] - &out[r - 1] * s_f;
        out.push(next);
    }
    out
}

/// Same recurrence with the product taken as `S_F P_{r-1}`.
pub fn newton_recurrence_left(s_f: &DMatrix<f64>, sigma: &[f64]) -> Vec<DMatrix<f64>> {
    let n = s_f.nrows();
    let mut out = Vec::with_capacity(n);
    out.push(DMatrix::identity(n, n));
    for r in 1..n {
        let next = DMatrix::identity(n, n) * sigma[r] - s_f * &out[r - 1];
        out.push(next);
    }
    out
}

/// Raw permutation-symbol contraction
/// `M_ij = (1/r!) Σ ε(i i_1..i_r ; j j_1..j_r) S_{i_1 j_1}⋯S_{i_r j_r}`.
pub fn newton_eps_raw(s_f: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let n = check_square(s_f)?;
    if r >= n {
        return Err(Error::OutOfRange { value: r, range: format!("0..{n}") });
    }
    let perms = permutations(r);
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // Index sets {i} ∪ I = {j} ∪ J =: U with |U| = r + 1.
            let mut acc = 0.0;
            for_each_subset(n, r + 1, |u| {
                if !u.contains(&i) || !u.contains(&j) {
                    return;
                }
                let rows: Vec<usize> = u.iter().copied().filter(|&x| x != i).collect();
                let cols: Vec<usize> = u.iter().copied().filter(|&x| x != j).collect();
                let mut upper = vec![i];
                upper.extend(&rows);
                for (p, _) in &perms {
                    let permuted: Vec<usize> = p.iter().map(|&k| cols[k]).collect();
                    let mut lower = vec![j];
                    lower.extend(&permuted);
                    let mut prod = sequence_sign(&upper, &lower);
                    for k in 0..r {
                        prod *= s_f[(rows[k], permuted[k])];
                    }
                    acc += prod;
                }
            });
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Permutation-symbol Newton tensor read as a (1,1)-tensor acting on column
/// vectors: the transpose of [`newton_eps_raw`].
pub fn newton_eps(s_f: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    Ok(newton_eps_raw(s_f, r)?.transpose())
}

/// Newton operators from the recurrence, cross-checked against the
/// permutation-symbol definition when `n ≤ 5`.
pub fn newton_ops(s_f: &DMatrix<f64>, sigma: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let n = check_square(s_f)?;
    let ops = newton_recurrence(s_f, sigma);
    if n <= MAX_EPS_NEWTON_DIM {
        let scale = s_f.amax().max(1.0).powi(n as i32 - 1);
        for (r, p) in ops.iter().enumerate() {
            let reference = newton_eps(s_f, r)?;
            let gap = (p - &reference).amax();
            if gap > 1e-8 * scale {
                return Err(Error::InternalConsistency(format!(
                    "Newton operator P_{r} differs from its permutation-symbol definition by {gap:e}"
                )));
            }
        }
    }
    Ok(ops)
}

/// Symmetric square root of an SPD matrix.
fn spd_sqrt(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Anisotropic curvature data at one point.
#[derive(Clone, Debug)]
pub struct CurvaturePoint {
    pub n: usize,
    pub a_f: Option<DMatrix<f64>>,
    pub s_f: DMatrix<f64>,
    /// Anisotropic principal curvatures, ascending.
    pub kappa: Vec<f64>,
    /// `σ_0..σ_n`.
    pub sigma: Vec<f64>,
    /// `H_0..H_{n+1}` with `H_0 = 1`, `H_{n+1} = 0`.
    pub h: Vec<f64>,
    /// `P_0..P_{n-1}`.
    pub p: Vec<DMatrix<f64>>,
    /// `T_r = P_r A_F`; empty when `A_F` is unknown.
    pub t: Vec<DMatrix<f64>>,
}

impl CurvaturePoint {
    /// From `A_F` (SPD) and the symmetric shape operator `S`.
    pub fn new(a_f: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<Self> {
        let s_f = sf_operator(a_f, s)?;
        let root = spd_sqrt(a_f);
        let similar = &root * s * &root;
        let similar = (&similar + similar.transpose()) * 0.5;
        let mut kappa: Vec<f64> = SymmetricEigen::new(similar).eigenvalues.iter().copied().collect();
        kappa.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut point = Self::assemble(s_f, kappa)?;
        point.t = point.p.iter().map(|p| p * a_f).collect();
        point.a_f = Some(a_f.clone());
        Ok(point)
    }

    /// From `S_F` alone; eigenvalues by a nonsymmetric solve.
    pub fn from_sf(s_f: &DMatrix<f64>) -> Result<Self> {
        check_square(s_f)?;
        let eig = s_f.complex_eigenvalues();
        let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if eig.iter().any(|z| z.im.abs() > 1e-8 * radius.max(1e-300)) {
            return Err(Error::InputDomain("S_F has non-real eigenvalues".into()));
        }
        let mut kappa: Vec<f64> = eig.iter().map(|z| z.re).collect();
        kappa.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self::assemble(s_f.clone(), kappa)
    }

    fn assemble(s_f: DMatrix<f64>, kappa: Vec<f64>) -> Result<Self> {
        let n = s_f.nrows();
        let sigma = sigma_charpoly(&s_f)?;
        let mut h: Vec<f64> = sigma.iter().enumerate().map(|(r, s)| s / binomial(n, r)).collect();
        h.push(0.0);
        let p = newton_recurrence(&s_f, &sigma);
        Ok(Self { n, a_f: None, s_f, kappa, sigma, h, p, t: Vec::new() })
    }

    /// `σ_r` with the conventions `σ_r = 0` for `r > n`.
    pub fn sigma_at(&self, r: usize) -> f64 {
        self.sigma.get(r).copied().unwrap_or(0.0)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.kappa.iter().map(|k| k.abs()).fold(0.0, f64::max)
    }

    pub fn is_umbilic(&self, rel_tol: f64) -> bool {
        is_umbilic(&self.kappa, rel_tol)
    }
}

pub fn is_umbilic(kappa: &[f64], rel_tol: f64) -> bool {
    let max = kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = kappa.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = kappa.iter().map(|k| k.abs()).fold(0.0, f64::max);
    max - min <= rel_tol * scale
}

/// `e_0..e_n` of a list of numbers.
pub fn elementary_symmetric(kappa: &[f64]) -> Vec<f64> {
    let n = kappa.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, k) in kappa.iter().enumerate() {
        for r in (1..=i + 1).rev() {
            e[r] += k * e[r - 1];
        }
    }
    e
}

/// `H_0..H_{n+1}` of a list of principal curvatures.
pub fn normalized_means(kappa: &[f64]) -> Vec<f64> {
    let n = kappa.len();
    let mut h: Vec<f64> = elementary_symmetric(kappa).iter().enumerate().map(|(r, e)| e / binomial(n, r)).collect();
    h.push(0.0);
    h
}

/// Residuals of the three trace identities for one `r`.
#[derive(Clone, Debug, Serialize)]
pub struct TraceResidual {
    pub r: usize,
    /// `|tr P_r - (n-r) σ_r|`
    pub trace: f64,
    /// `|tr(P_r S_F) - (r+1) σ_{r+1}|`
    pub trace_sf: f64,
    /// `|tr(P_r S_F²) - (σ_1 σ_{r+1} - (r+2) σ_{r+2})|`
    pub trace_sf2: f64,
    /// Same, against `σ_1 σ_{r+1} - σ_{r+2}` (without the `(r+2)` factor).
    /// Reported for comparison; it does not hold in general.
    pub trace_sf2_without_factor: f64,
}

pub fn trace_checks(point: &CurvaturePoint) -> Vec<TraceResidual> {
    let n = point.n;
    let sf2 = &point.s_f * &point.s_f;
    (0..n)
        .map(|r| {
            let p = &point.p[r];
            let s = |k: usize| point.sigma_at(k);
            let rhs4 = s(1) * s(r + 1) - (r + 2) as f64 * s(r + 2);
            let lhs4 = (p * &sf2).trace();
            TraceResidual {
                r,
                trace: (p.trace() - (n - r) as f64 * s(r)).abs(),
                trace_sf: ((p * &point.s_f).trace() - (r + 1) as f64 * s(r + 1)).abs(),
                trace_sf2: (lhs4 - rhs4).abs(),
                trace_sf2_without_factor: (lhs4 - (s(1) * s(r + 1) - s(r + 2))).abs(),
            }
        })
        .collect()
}

/// Outcome of checking the Maclaurin-type inequalities at one point.
#[derive(Clone, Debug, Serialize)]
pub struct MaclaurinReport {
    pub r: usize,
    /// `H_{r+1} > 0`.
    pub applicable: bool,
    /// `H_1, …, H_{r+1}` all positive, i.e. κ lies in the positive cone
    /// component of `{H_{r+1} > 0}`.
    pub in_positive_cone: bool,
    /// `H_j > 0` for `j ≤ r`.
    pub positivity_holds: bool,
    /// `H_1 H_{j+1} - H_{j+2}` for `j = 0..r-1`.
    pub gaps: Vec<f64>,
    pub min_gap: f64,
    pub inequalities_hold: bool,
    pub umbilic: bool,
}

pub fn maclaurin_check(kappa: &[f64], r: usize) -> Result<MaclaurinReport> {
    let n = kappa.len();
    if r + 1 > n {
        return Err(Error::OutOfRange { value: r, range: format!("0..{n}") });
    }
    let h = normalized_means(kappa);
    let applicable = h[r + 1] > 0.0;
    let in_positive_cone = (1..=r + 1).all(|j| h[j] > 0.0);
    let positivity_holds = (1..=r).all(|j| h[j] > 0.0);
    let gaps: Vec<f64> = (0..r).map(|j| h[1] * h[j + 1] - h[j + 2]).collect();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MaclaurinReport {
        r,
        applicable,
        in_positive_cone,
        positivity_holds,
        inequalities_hold: gaps.iter().all(|g| *g >= -1e-10),
        min_gap,
        gaps,
        umbilic: is_umbilic(kappa, 1e-8),
    })
}

/// The quadratic `z ↦ F(ν)(H_1 H_{j+1} z² - 2 H_{j+1} β z + H_j β²)`.
#[derive(Clone, Debug, Serialize)]
pub struct Discriminant {
    pub j: usize,
    pub delta: f64,
    pub leading: f64,
    /// Scale against which `delta` is compared.
    pub scale: f64,
    pub delta_nonpositive: bool,
    coeffs: [f64; 3],
}

impl Discriminant {
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs[0] * z * z + self.coeffs[1] * z + self.coeffs[2]
    }
}

pub fn discriminant_p(j: usize, f_nu: f64, beta: f64, h: &[f64]) -> Result<Discriminant> {
    if j + 1 >= h.len() {
        return Err(Error::OutOfRange { value: j, range: format!("0..{}", h.len() - 1) });
    }
    let (h1, hj, hj1) = (h[1], h[j], h[j + 1]);
    let leading = f_nu * h1 * hj1;
    if !(leading > 0.0) {
        return Err(Error::PositivityHypothesis(format!("leading coefficient F(ν) H_1 H_{} = {leading:e} is not positive", j + 1)));
    }
    let delta = 4.0 * beta * beta * f_nu * f_nu * hj1 * (hj1 - h1 * hj);
    let scale = 4.0 * beta * beta * f_nu * f_nu * hj1 * (hj1.abs() + (h1 * hj).abs());
    Ok(Discriminant {
        j,
        delta,
        leading,
        scale,
        delta_nonpositive: delta <= 1e-10 * scale.max(1e-300),
        coeffs: [leading, -2.0 * f_nu * hj1 * beta, f_nu * hj * beta * beta],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &b * b.transpose() + DMatrix::identity(n, n) * 0.5
    }

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&b + b.transpose()) * 0.5
    }

    #[test]
    fn binomials_and_b() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(b_coeff(3, 0), 3.0);
        assert_eq!(b_coeff(3, 1), 6.0);
    }

    #[test]
    fn sf_examples() {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert_eq!(sf_operator(&DMatrix::identity(3, 3), &s).unwrap(), s);
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0]));
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let sf = sf_operator(&a, &s).unwrap();
        assert_eq!(sf, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 0.0]));
        let p = CurvaturePoint::new(&a, &s).unwrap();
        assert_relative_eq!(p.kappa[0], -2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(p.kappa[1], 2f64.sqrt(), epsilon = 1e-14);
        let not_spd = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(sf_operator(&not_spd, &s), Err(Error::ConvexityViolation(_))));
    }

    #[test]
    fn kappa_by_similarity_matches_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 5);
            let s = random_sym(&mut rng, 5);
            let p = CurvaturePoint::new(&a, &s).unwrap();
            let q = CurvaturePoint::from_sf(&(&a * &s)).unwrap();
            for (x, y) in p.kappa.iter().zip(&q.kappa) {
                assert!((x - y).abs() < 1e-10 * p.spectral_radius().max(1.0));
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!((1..=3).map(|r| sigma_eps(&id, r).unwrap()).collect::<Vec<_>>(), vec![3.0, 3.0, 1.0]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert_eq!((1..=3).map(|r| sigma_eps(&d, r).unwrap()).collect::<Vec<_>>(), vec![6.0, 11.0, 6.0]);
        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(sigma_charpoly(&nil).unwrap(), vec![1.0, 0.0, 0.0]);
        let two = DMatrix::<f64>::identity(3, 3) * 2.0;
        assert_eq!(sigma_charpoly(&two).unwrap(), vec![1.0, 6.0, 12.0, 8.0]);
        assert!(sigma_eps(&id, 4).is_err());
        assert!(sigma_eps(&DMatrix::identity(9, 9), 1).is_err());
    }

    #[test]
    fn sigma_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=5);
            let s_f = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
            let cp = sigma_charpoly(&s_f).unwrap();
            for r in 0..=n {
                let e = sigma_eps(&s_f, r).unwrap();
                assert!((e - cp[r]).abs() <= 1e-10 * cp[r].abs().max(1.0), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn newton_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        let sigma = sigma_charpoly(&id).unwrap();
        let p = newton_ops(&id, &sigma).unwrap();
        assert_eq!(p[1], &id * 2.0);
        assert_eq!(p[2], id);
    }

    #[test]
    fn newton_orders_and_index_placement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_spd(&mut rng, 4);
        let s = random_sym(&mut rng, 4);
        let s_f = &a * &s;
        let sigma = sigma_charpoly(&s_f).unwrap();
        let right = newton_recurrence(&s_f, &sigma);
        let left = newton_recurrence_left(&s_f, &sigma);
        for r in 0..4 {
            assert!((&right[r] - &left[r]).amax() < 1e-10);
            assert!((&right[r] - newton_eps(&s_f, r).unwrap()).amax() < 1e-10);
        }
        // The untransposed contraction is not the operator once S_F is non-symmetric.
        let raw = newton_eps_raw(&s_f, 1).unwrap();
        assert!((&raw - &right[1]).amax() > 1e-3);
        assert!(((&raw * &a) - (&raw * &a).transpose()).amax() > 1e-3);
    }

    #[test]
    fn t_is_symmetric_and_traces_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            for _ in 0..50 {
                let a = random_spd(&mut rng, n);
                let s = random_sym(&mut rng, n);
                let p = CurvaturePoint::new(&a, &s).unwrap();
                for t in &p.t {
                    assert!((t - t.transpose()).amax() < 1e-10 * t.amax().max(1.0));
                }
                let scale = p.spectral_radius().max(1.0).powi(n as i32 + 1);
                for res in trace_checks(&p) {
                    assert!(res.trace < 1e-8 * scale);
                    assert!(res.trace_sf < 1e-8 * scale);
                    assert!(res.trace_sf2 < 1e-8 * scale);
                }
            }
        }
    }

    #[test]
    fn trace_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        let p = CurvaturePoint::from_sf(&id).unwrap();
        assert_eq!(p.p[1].trace(), 6.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let p = CurvaturePoint::from_sf(&d).unwrap();
        assert!(((&p.p[1] * &d).trace() - 22.0).abs() < 1e-12);
        // Without the (r+2) factor the fourth identity fails already here.
        assert!(trace_checks(&p)[0].trace_sf2_without_factor > 1.0);
    }

    #[test]
    fn normalization_pin() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 2..=6 {
            let a = random_spd(&mut rng, n);
            let s = random_sym(&mut rng, n);
            let p = CurvaturePoint::new(&a, &s).unwrap();
            for j in 0..n {
                let lhs = (j + 1) as f64 * p.sigma[j + 1];
                assert!((lhs - b_coeff(n, j) * p.h[j + 1]).abs() <= 1e-12 * lhs.abs().max(1.0));
            }
            for j in 0..n.saturating_sub(1) {
                let sigma_form = p.sigma[1] * p.sigma[j + 1] - (j + 2) as f64 * p.sigma_at(j + 2);
                let h_form = binomial(n, j + 1) * (n as f64 * p.h[1] * p.h[j + 1] - (n - j - 1) as f64 * p.h[j + 2]);
                assert!((sigma_form - h_form).abs() <= 1e-10 * sigma_form.abs().max(1.0));
            }
        }
    }

    #[test]
    fn scale_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_spd(&mut rng, 4);
        let s = random_sym(&mut rng, 4);
        let p = CurvaturePoint::new(&a, &s).unwrap();
        let q = CurvaturePoint::new(&a, &(&s * 1.7)).unwrap();
        for r in 0..=4 {
            let expect = 1.7f64.powi(r as i32) * p.sigma[r];
            assert!((q.sigma[r] - expect).abs() <= 1e-10 * expect.abs().max(1.0));
            let expect = 1.7f64.powi(r as i32) * p.h[r];
            assert!((q.h[r] - expect).abs() <= 1e-10 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn maclaurin_examples() {
        let r = maclaurin_check(&[0.7; 4], 3).unwrap();
        assert!(r.applicable && r.umbilic && r.inequalities_hold);
        assert!(r.gaps.iter().all(|g| g.abs() < 1e-15));
        let r = maclaurin_check(&[1.0, 2.0, 3.0], 1).unwrap();
        assert_relative_eq!(r.gaps[0], 1.0 / 3.0, epsilon = 1e-14);
        assert!(!r.umbilic);
        // H_3 > 0 outside the positive cone: the inequality chain breaks.
        let r = maclaurin_check(&[-1.0, -1.0, 1.0], 2).unwrap();
        assert!(r.applicable && !r.in_positive_cone && !r.inequalities_hold);
        assert!(maclaurin_check(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn discriminant_examples() {
        let h = normalized_means(&[1.0, 2.0, 3.0]);
        let d = discriminant_p(1, 1.0, 1.0, &h).unwrap();
        assert_relative_eq!(d.delta, -44.0 / 9.0, epsilon = 1e-12);
        assert!(d.delta_nonpositive);
        let c = 0.8;
        let h = normalized_means(&[c; 3]);
        let d = discriminant_p(1, 1.3, 0.4, &h).unwrap();
        assert!(d.delta.abs() < 1e-15);
        // Perfect square F c^j (c z - β)², vanishing at z = β / c.
        assert!(d.eval(0.4 / c).abs() < 1e-15);
        assert_relative_eq!(d.eval(2.0), 1.3 * c * (c * 2.0 - 0.4f64).powi(2), epsilon = 1e-14);
        let h = normalized_means(&[-1.0, -2.0, -3.0]);
        assert!(matches!(discriminant_p(1, 1.0, 1.0, &h), Err(Error::PositivityHypothesis(_))));
    }
}
