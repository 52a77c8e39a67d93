//! Dual certificates and facets of the cube.
//!
//! Decoding against `Y` corrects every corruption with support `I` and sign
//! pattern `s` exactly when the complement `E = Y^perp` contains a vector `w`
//! with `w_I = s` and `|w_j| < 1` off `I`, i.e. when `E` passes through the
//! relative interior of the cube facet `{w : w_I = s, ||w||_inf <= 1}`.
//! [`min_inf_certificate`] finds the smallest achievable `max_{j not in I} |w_j|`
//! (written `t*`) by linear programming; sweeping it over every facet gives
//! the facet count of the section `E ∩ [-1, 1]^m` and the uniform recovery
//! certificate of a codec.
//!
//! The module also carries two numerical checks on random subspaces: the
//! projection identity relating the distance from the facet center to
//! `E ∩ aff(F)` with the projection onto `E ∩ lin(F)`, and the mean squared
//! length of a random projection of a fixed unit vector.

use rayon::prelude::*;

use crate::bp::{decode_l1, BpError, SubspaceBasis};
use crate::codec::Codec;
use crate::linalg::{
    least_squares, min_norm_solve, norm, null_space, sample_haar_orthonormal, LinalgError, NormKind, RealMatrix,
    RealVector, SeedSpec,
};
use crate::lp::{binomial, solve_standard, LpError, LpStatus, StandardLp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL};

/// Width of the band around `t* = 1` classified as [`CertificateClass::Boundary`].
pub const STRICT_MARGIN: f64 = 1e-7;

/// Largest facet family an exhaustive sweep will visit.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;

/// Minimum of `||z + v||_1` over `v in Y` (with `||z||_1 = 1`) accepted as separated.
pub const SEPARATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid facet: {0}")]
    InvalidFacet(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("facet family of size {count} exceeds the exhaustive limit")]
    TooLarge { count: u128 },
    #[error("E does not meet the affine span of the facet")]
    DegenerateIntersection,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Bp(#[from] BpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Facet of `[-1, 1]^m` fixing the coordinates in `support` to `signs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Facet {
    support: Vec<usize>,
    signs: Vec<i8>,
}

impl Facet {
    pub fn new(support: Vec<usize>, signs: Vec<i8>, m: usize) -> Result<Self, GeometryError> {
        if support.len() != signs.len() {
            return Err(GeometryError::InvalidFacet("support and signs differ in length".into()));
        }
        if let Some(&i) = support.iter().find(|&&i| i >= m) {
            return Err(GeometryError::InvalidFacet(format!("index {i} out of range for m = {m}")));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeometryError::InvalidFacet("repeated index".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(GeometryError::InvalidFacet("signs must be +1 or -1".into()));
        }
        Ok(Self { support, signs })
    }

    pub fn empty() -> Self {
        Self { support: Vec::new(), signs: Vec::new() }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn r(&self) -> usize {
        self.support.len()
    }

    /// The facet center: `signs` on the support, zero elsewhere.
    pub fn center(&self, m: usize) -> RealVector {
        let mut v = RealVector::zeros(m);
        for (&i, &s) in self.support.iter().zip(&self.signs) {
            v[i] = s as f64;
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateClass {
    Strict,
    Boundary,
    None,
}

impl CertificateClass {
    pub fn from_t(t: f64) -> Self {
        if t <= 1.0 - STRICT_MARGIN {
            Self::Strict
        } else if t < 1.0 + STRICT_MARGIN {
            Self::Boundary
        } else {
            Self::None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateOutcome {
    /// `min max_{j not in I} |w_j|`; `+inf` when no `w in E` matches the signs.
    pub t_star: f64,
    /// The minimizing `w`, absent when the equality rows are inconsistent.
    pub w: Option<RealVector>,
    pub class: CertificateClass,
}

impl CertificateOutcome {
    /// The equality rows `w_I = s` have no solution in `E`.
    pub fn infeasible_equalities(&self) -> bool {
        self.w.is_none()
    }
}

/// Columns `[c+ (R) | c- (R) | t | sigma (m - r) | tau (m - r)]` with `w = E c`:
/// `E_I c = s`, `E_j c - t + sigma_j = 0`, `-E_j c - t + tau_j = 0`; minimize `t`.
fn certificate_lp(e: &SubspaceBasis, facet: &Facet) -> Result<(StandardLp, Vec<usize>), GeometryError> {
    let (m, big_r) = (e.ambient_dim(), e.dim());
    let em = e.matrix();
    let mut on_support = vec![false; m];
    for &i in facet.support() {
        on_support[i] = true;
    }
    let off: Vec<usize> = (0..m).filter(|&j| !on_support[j]).collect();
    let r = facet.r();
    let rows = r + 2 * off.len();
    let cols = 2 * big_r + 1 + 2 * off.len();
    let t_col = 2 * big_r;
    let mut a = RealMatrix::zeros(rows, cols);
    let mut b = vec![0.0; rows];
    for (p, (&i, &s)) in facet.support().iter().zip(facet.signs()).enumerate() {
        for k in 0..big_r {
            a[(p, k)] = em[(i, k)];
            a[(p, big_r + k)] = -em[(i, k)];
        }
        b[p] = s as f64;
    }
    for (q, &j) in off.iter().enumerate() {
        let (up, lo) = (r + 2 * q, r + 2 * q + 1);
        for k in 0..big_r {
            a[(up, k)] = em[(j, k)];
            a[(up, big_r + k)] = -em[(j, k)];
            a[(lo, k)] = -em[(j, k)];
            a[(lo, big_r + k)] = em[(j, k)];
        }
        a[(up, t_col)] = -1.0;
        a[(lo, t_col)] = -1.0;
        a[(up, t_col + 1 + 2 * q)] = 1.0;
        a[(lo, t_col + 2 + 2 * q)] = 1.0;
    }
    let mut c = vec![0.0; cols];
    c[t_col] = 1.0;
    let lp = StandardLp::new(a, RealVector::from_vec_unchecked(b), RealVector::from_vec_unchecked(c))?
        .with_split_pairs((0..big_r).map(|k| (k, big_r + k)).collect());
    Ok((lp, off))
}

/// Smallest `t` such that some `w in E` has `w_I = s` and `|w_j| <= t` off `I`.
pub fn min_inf_certificate(e: &SubspaceBasis, facet: &Facet) -> Result<CertificateOutcome, GeometryError> {
    let m = e.ambient_dim();
    if facet.support().iter().any(|&i| i >= m) {
        return Err(GeometryError::InvalidFacet(format!("support exceeds m = {m}")));
    }
    if facet.r() == 0 {
        return Ok(CertificateOutcome { t_star: 0.0, w: Some(RealVector::zeros(m)), class: CertificateClass::Strict });
    }
    if e.dim() == 0 {
        return Ok(CertificateOutcome { t_star: f64::INFINITY, w: None, class: CertificateClass::None });
    }
    let (lp, off) = certificate_lp(e, facet)?;
    let out = solve_standard(&lp, DEFAULT_FEAS_TOL, DEFAULT_OPT_TOL)?;
    match out.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Ok(CertificateOutcome { t_star: f64::INFINITY, w: None, class: CertificateClass::None });
        }
        LpStatus::Unbounded => return Err(LpError::NumericalFailure("certificate LP unbounded".into()).into()),
    }
    let x = out.x.expect("optimal outcome carries x");
    let big_r = e.dim();
    let coeffs: Vec<f64> = (0..big_r).map(|k| x[k] - x[big_r + k]).collect();
    let mut w = e.matrix().matvec(&coeffs);
    for (&i, &s) in facet.support().iter().zip(facet.signs()) {
        w[i] = s as f64;
    }
    let t_star = off.iter().fold(0.0f64, |acc, &j| acc.max(w[j].abs()));
    Ok(CertificateOutcome { t_star, class: CertificateClass::from_t(t_star), w: Some(RealVector::from_vec_unchecked(w)) })
}

/// Whether `min_{v in Y} ||z / ||z||_1 + v||_1 >= 1 - SEPARATION_TOL`.
pub fn verify_separation(y: &SubspaceBasis, z: &RealVector) -> Result<bool, GeometryError> {
    if z.dim() != y.ambient_dim() {
        return Err(GeometryError::InvalidArgument(format!("z has {} entries, expected {}", z.dim(), y.ambient_dim())));
    }
    let mass = z.norm(NormKind::L1);
    if mass == 0.0 {
        return Err(GeometryError::InvalidArgument("z must be nonzero".into()));
    }
    // min_{v in Y} ||z + v||_1 = min_{u in Y} ||u - (-z)||_1.
    let target = z.scaled(-1.0 / mass);
    let res = decode_l1(y, &target)?;
    Ok(res.objective >= 1.0 - SEPARATION_TOL)
}

/// All `r`-subsets of `0..m` in colexicographic order.
pub fn supports_colex(m: usize, r: usize) -> Vec<Vec<usize>> {
    if r > m {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let Some(p) = (0..r).find(|&p| idx[p] + 1 < if p + 1 < r { idx[p + 1] } else { m }) else {
            break;
        };
        idx[p] += 1;
        for (q, v) in idx.iter_mut().enumerate().take(p) {
            *v = q;
        }
    }
    out
}

/// Sign pattern number `k`: bit `b` set means the `b`-th support element is `-1`.
pub fn sign_pattern(r: usize, k: usize) -> Vec<i8> {
    (0..r).map(|b| if k >> b & 1 == 1 { -1 } else { 1 }).collect()
}

/// `2^r C(m, r)`, the number of `(m - r)`-dimensional facets of `[-1, 1]^m`.
pub fn facet_family_size(m: usize, r: usize) -> u128 {
    if r >= 128 {
        return u128::MAX;
    }
    binomial(m, r).saturating_mul(1u128 << r)
}

/// Every facet with `|I| = r`: supports in colex order, each followed by its
/// sign patterns in binary order.
pub fn enumerate_facets(m: usize, r: usize) -> Result<Vec<Facet>, GeometryError> {
    let count = facet_family_size(m, r);
    if count > EXHAUSTIVE_LIMIT {
        return Err(GeometryError::TooLarge { count });
    }
    let mut out = Vec::with_capacity(count as usize);
    for support in supports_colex(m, r) {
        for k in 0..1usize << r {
            out.push(Facet { support: support.clone(), signs: sign_pattern(r, k) });
        }
    }
    Ok(out)
}

/// A uniformly random facet with `|I| = r`.
pub fn random_facet(m: usize, r: usize, rng: &mut crate::linalg::SeededRng) -> Facet {
    let perm = rng.permutation(m);
    let mut support = perm[..r].to_vec();
    support.sort_unstable();
    let signs = (0..r).map(|_| if rng.sign() > 0.0 { 1 } else { -1 }).collect();
    Facet { support, signs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Exhaustive,
    /// `count` facets drawn uniformly with replacement.
    Sampled { count: usize, seed: SeedSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FacetCount {
    pub strict: u64,
    pub boundary: u64,
    pub none: u64,
    /// `strict + boundary`.
    pub intersected: u64,
    /// `2^r C(m, r)`.
    pub max: u128,
    pub examined: u64,
}

fn sweep(e: &SubspaceBasis, facets: &[Facet]) -> Result<Vec<CertificateOutcome>, GeometryError> {
    facets.par_iter().map(|f| min_inf_certificate(e, f)).collect()
}

pub fn facet_intersection_count(e: &SubspaceBasis, r: usize, mode: SweepMode) -> Result<FacetCount, GeometryError> {
    let m = e.ambient_dim();
    if r > m {
        return Err(GeometryError::InvalidArgument(format!("r = {r} exceeds m = {m}")));
    }
    let facets = match mode {
        SweepMode::Exhaustive => enumerate_facets(m, r)?,
        SweepMode::Sampled { count, seed } => {
            let mut rng = seed.rng();
            (0..count).map(|_| random_facet(m, r, &mut rng)).collect()
        }
    };
    let outcomes = sweep(e, &facets)?;
    let mut count = FacetCount { strict: 0, boundary: 0, none: 0, intersected: 0, max: facet_family_size(m, r), examined: 0 };
    for o in &outcomes {
        match o.class {
            CertificateClass::Strict => count.strict += 1,
            CertificateClass::Boundary => count.boundary += 1,
            CertificateClass::None => count.none += 1,
        }
    }
    count.intersected = count.strict + count.boundary;
    count.examined = outcomes.len() as u64;
    Ok(count)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformCertificate {
    /// Every facet has a strict certificate.
    pub all_strict: bool,
    /// Largest `t*` over all facets (the null-space constant of `Y` at order `r`).
    pub worst_t: f64,
    pub none_count: u64,
    pub boundary_count: u64,
    pub facets: u64,
}

/// Exhaustive certificate sweep of `E` over every facet with `|I| = r`.
pub fn certify_subspace(e: &SubspaceBasis, r: usize) -> Result<UniformCertificate, GeometryError> {
    let facets = enumerate_facets(e.ambient_dim(), r)?;
    let outcomes = sweep(e, &facets)?;
    let mut cert = UniformCertificate { all_strict: true, worst_t: 0.0, none_count: 0, boundary_count: 0, facets: outcomes.len() as u64 };
    for o in &outcomes {
        cert.worst_t = cert.worst_t.max(o.t_star);
        match o.class {
            CertificateClass::Strict => {}
            CertificateClass::Boundary => {
                cert.all_strict = false;
                cert.boundary_count += 1;
            }
            CertificateClass::None => {
                cert.all_strict = false;
                cert.none_count += 1;
            }
        }
    }
    Ok(cert)
}

/// Whether every facet with `|I| = r` has a strict certificate, stopping at the
/// first block of facets that contains a failure.
pub fn is_uniformly_certified(e: &SubspaceBasis, r: usize) -> Result<bool, GeometryError> {
    const BLOCK: usize = 64;
    let facets = enumerate_facets(e.ambient_dim(), r)?;
    for block in facets.chunks(BLOCK) {
        if sweep(e, block)?.iter().any(|o| o.class != CertificateClass::Strict) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the codec provably corrects every corruption of at most `r` coordinates.
pub fn certify_uniform(codec: &Codec) -> Result<UniformCertificate, GeometryError> {
    certify_subspace(codec.complement(), codec.params().r)
}

/// Closed-form facet count for `r = 1` when `E = v^perp`: facet `(i, s)` is met
/// iff `|v_i| <= sum_{j != i} |v_j|`.
pub fn hyperplane_criterion_count(v: &[f64]) -> u64 {
    let total: f64 = v.iter().map(|x| x.abs()).sum();
    2 * v.iter().filter(|x| x.abs() <= total - x.abs()).count() as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionIdentity {
    /// `||P_{E ∩ lin(F)} theta||_2`.
    pub lhs: f64,
    /// `sqrt(r / (r + D^2)) ||theta||_2`.
    pub rhs: f64,
    /// `D = dist(theta, E ∩ aff(F))`.
    pub distance: f64,
    /// `||theta||_2 = sqrt(r)`.
    pub theta_norm: f64,
}

impl ProjectionIdentity {
    pub fn relative_deviation(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.theta_norm
    }
}

/// Projection identity for the facet whose last `r` coordinates are fixed to 1,
/// with `e` an orthonormal basis of `E`.
///
/// The distance `D` comes from an affine least-squares problem over
/// `E ∩ aff(F)`; the projection comes from an orthonormal basis of `E ∩ lin(F)`.
pub fn projection_identity_for_basis(e: &RealMatrix, r: usize) -> Result<ProjectionIdentity, GeometryError> {
    let (m, big_r) = (e.rows(), e.cols());
    if r == 0 || r > m {
        return Err(GeometryError::InvalidArgument(format!("need 1 <= r <= m, got r = {r}, m = {m}")));
    }
    let tail: Vec<usize> = (m - r..m).collect();
    let mut theta = vec![0.0; m];
    tail.iter().for_each(|&i| theta[i] = 1.0);
    let theta_norm = (r as f64).sqrt();

    // D: min ||E c - theta|| subject to E_T c = 1.
    let e_t = e.select_rows(&tail);
    let ones = vec![1.0; r];
    let c_p = min_norm_solve(&e_t, &ones).map_err(|_| GeometryError::DegenerateIntersection)?;
    let consistency = e_t.matvec(&c_p).iter().fold(0.0f64, |acc, v| acc.max((v - 1.0).abs()));
    if consistency > 1e-9 {
        return Err(GeometryError::DegenerateIntersection);
    }
    let base = e.matvec(&c_p);
    let point = if big_r > r {
        let ns = null_space(&e_t)?;
        let en = e.matmul(&ns);
        let rhs: Vec<f64> = theta.iter().zip(&base).map(|(t, b)| t - b).collect();
        let z = least_squares(&en, &rhs)?;
        let shift = en.matvec(&z);
        base.iter().zip(&shift).map(|(b, s)| b + s).collect()
    } else {
        base
    };
    let distance = norm(&point.iter().zip(&theta).map(|(p, t)| p - t).collect::<Vec<_>>(), NormKind::L2);
    let rhs = (r as f64 / (r as f64 + distance * distance)).sqrt() * theta_norm;

    // Basis of E ∩ lin(F): E c with equal entries on the tail.
    let g = if r == 1 {
        e.clone()
    } else {
        let diffs: Vec<Vec<f64>> = tail
            .windows(2)
            .map(|w| (0..big_r).map(|k| e[(w[0], k)] - e[(w[1], k)]).collect())
            .collect();
        let dm = RealMatrix::from_rows(&diffs)?;
        if dm.rows() >= big_r {
            return Err(GeometryError::DegenerateIntersection);
        }
        e.matmul(&null_space(&dm)?)
    };
    let lhs = norm(&g.tr_matvec(&theta), NormKind::L2);
    Ok(ProjectionIdentity { lhs, rhs, distance, theta_norm })
}

/// [`projection_identity_for_basis`] on a Haar-random `R`-dimensional `E`.
#[allow(non_snake_case)]
pub fn projection_identity_check(m: usize, r: usize, R: usize, seed: SeedSpec) -> Result<ProjectionIdentity, GeometryError> {
    if R == 0 || R > m {
        return Err(GeometryError::InvalidArgument(format!("need 1 <= R <= m, got R = {R}, m = {m}")));
    }
    let e = sample_haar_orthonormal(m, R, seed)?;
    projection_identity_for_basis(&e, r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionStats {
    pub mean_sq_ratio: f64,
    pub std: f64,
    pub trials: usize,
}

/// Mean and standard deviation of `||P_G theta||^2` for `theta = (1, ..., 1)/sqrt(d)`
/// over Haar-random `k`-dimensional subspaces `G` of `R^d`.
pub fn projection_length_stats(d: usize, k: usize, trials: usize, seed: SeedSpec) -> Result<ProjectionStats, GeometryError> {
    if k == 0 || k > d || trials == 0 {
        return Err(GeometryError::InvalidArgument(format!("need 1 <= k <= d and trials >= 1 (d = {d}, k = {k}, trials = {trials})")));
    }
    let theta = vec![1.0 / (d as f64).sqrt(); d];
    let ratios: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let g = sample_haar_orthonormal(d, k, seed.derive(t))?;
            let p = g.tr_matvec(&theta);
            Ok(p.iter().map(|v| v * v).sum())
        })
        .collect::<Result<_, GeometryError>>()?;
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = if ratios.len() > 1 { ratios.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(ProjectionStats { mean_sq_ratio: mean, std: var.sqrt(), trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complement_basis, RealMatrix};

    /// E = span((1, 0.5, 0.5)) in R^3.
    fn line_e() -> SubspaceBasis {
        let v = [1.0, 0.5, 0.5];
        let n = norm(&v, NormKind::L2);
        SubspaceBasis::new(RealMatrix::new(3, 1, v.iter().map(|x| x / n).collect()).unwrap()).unwrap()
    }

    #[test]
    fn empty_facet_is_strict() {
        let out = min_inf_certificate(&line_e(), &Facet::empty()).unwrap();
        assert_eq!(out.t_star, 0.0);
        assert_eq!(out.class, CertificateClass::Strict);
        assert_eq!(out.w.unwrap().norm(NormKind::Linf), 0.0);
    }

    #[test]
    fn one_dimensional_e_forces_w() {
        let f = Facet::new(vec![0], vec![1], 3).unwrap();
        let out = min_inf_certificate(&line_e(), &f).unwrap();
        assert!((out.t_star - 0.5).abs() < 1e-12);
        assert_eq!(out.class, CertificateClass::Strict);
        let w = out.w.unwrap();
        for (a, b) in w.iter().zip([1.0, 0.5, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }

        let f = Facet::new(vec![1], vec![1], 3).unwrap();
        let out = min_inf_certificate(&line_e(), &f).unwrap();
        assert!((out.t_star - 2.0).abs() < 1e-12);
        assert_eq!(out.class, CertificateClass::None);
        for (a, b) in out.w.unwrap().iter().zip([2.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inconsistent_equalities_give_sentinel() {
        // E = span(e1): no w in E has w_2 = 1.
        let e = SubspaceBasis::new(RealMatrix::new(3, 1, vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
        let out = min_inf_certificate(&e, &Facet::new(vec![1], vec![-1], 3).unwrap()).unwrap();
        assert!(out.t_star.is_infinite());
        assert!(out.infeasible_equalities());
        assert_eq!(out.class, CertificateClass::None);
    }

    #[test]
    fn facet_validation() {
        assert!(Facet::new(vec![3], vec![1], 3).is_err());
        assert!(Facet::new(vec![0, 0], vec![1, 1], 3).is_err());
        assert!(Facet::new(vec![0], vec![0], 3).is_err());
        assert_eq!(Facet::new(vec![2, 0], vec![-1, 1], 3).unwrap().center(3).as_slice(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn separation_edge_cases() {
        let z = RealVector::new(vec![0.3, 0.0, -0.7]).unwrap();
        assert!(verify_separation(&SubspaceBasis::zero(3), &z).unwrap());
        assert!(!verify_separation(&SubspaceBasis::full(3), &z).unwrap());
        assert!(verify_separation(&SubspaceBasis::zero(3), &RealVector::zeros(3)).is_err());

        // Y = E^perp for the line E above; the strict facet ({1}, +) separates.
        let y = SubspaceBasis::new(complement_basis(line_e().matrix()).unwrap()).unwrap();
        assert!(verify_separation(&y, &RealVector::unit(3, 0)).unwrap());
        assert!(!verify_separation(&y, &RealVector::unit(3, 1)).unwrap());
    }

    #[test]
    fn colex_and_binary_orders() {
        assert_eq!(supports_colex(4, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]);
        assert_eq!(supports_colex(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(supports_colex(2, 3), Vec::<Vec<usize>>::new());
        assert_eq!(sign_pattern(2, 0), vec![1, 1]);
        assert_eq!(sign_pattern(2, 1), vec![-1, 1]);
        assert_eq!(sign_pattern(2, 2), vec![1, -1]);
        let facets = enumerate_facets(3, 1).unwrap();
        assert_eq!(facets.len(), 6);
        assert_eq!(facets[1], Facet::new(vec![0], vec![-1], 3).unwrap());
        assert_eq!(facet_family_size(8, 1), 16);
        assert!(matches!(enumerate_facets(40, 5), Err(GeometryError::TooLarge { .. })));
    }

    #[test]
    fn plane_with_one_dimensional_e() {
        let v = [1.0, 0.3];
        let n = norm(&v, NormKind::L2);
        let e = SubspaceBasis::new(RealMatrix::new(2, 1, vec![v[0] / n, v[1] / n]).unwrap()).unwrap();
        let count = facet_intersection_count(&e, 1, SweepMode::Exhaustive).unwrap();
        assert_eq!((count.intersected, count.max, count.none), (2, 4, 2));
        let zero = facet_intersection_count(&e, 0, SweepMode::Exhaustive).unwrap();
        assert_eq!((zero.intersected, zero.max), (1, 1));
        let sampled = facet_intersection_count(&e, 1, SweepMode::Sampled { count: 50, seed: SeedSpec::new(1, 0) }).unwrap();
        assert_eq!(sampled.examined, 50);
        assert!(sampled.intersected > 0 && sampled.none > 0);
    }

    #[test]
    fn early_exit_agrees_with_full_sweep() {
        for seed in 0..6 {
            let e = SubspaceBasis::new(sample_haar_orthonormal(7, 4, SeedSpec::new(seed, 0)).unwrap()).unwrap();
            for r in 0..3 {
                assert_eq!(is_uniformly_certified(&e, r).unwrap(), certify_subspace(&e, r).unwrap().all_strict);
            }
        }
    }

    #[test]
    fn hyperplane_oracle_counts() {
        assert_eq!(hyperplane_criterion_count(&[1.0, 1.0, 1.0]), 6);
        assert_eq!(hyperplane_criterion_count(&[5.0, 1.0, 1.0]), 4);
    }

    #[test]
    fn projection_identity_with_theta_in_e() {
        // E spanned by theta/|theta| and a unit vector orthogonal to it, r = 2.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = 1.5f64.sqrt();
        let e = RealMatrix::from_columns(5, &[vec![0.0, 0.0, 0.0, s, s], vec![1.0 / q, 0.0, 0.0, 0.5 / q, -0.5 / q]]).unwrap();
        let id = projection_identity_for_basis(&e, 2).unwrap();
        assert!(id.distance.abs() < 1e-12);
        assert!((id.lhs - 2f64.sqrt()).abs() < 1e-12);
        assert!((id.rhs - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projection_identity_vertex_case() {
        // r = m: lin(F) is the line through theta, which E either contains or misses.
        let id = projection_identity_for_basis(&RealMatrix::identity(3), 3).unwrap();
        assert!((id.lhs - 3f64.sqrt()).abs() < 1e-12 && id.distance.abs() < 1e-12);
        let e = sample_haar_orthonormal(3, 2, SeedSpec::new(4, 0)).unwrap();
        assert!(matches!(projection_identity_for_basis(&e, 3), Err(GeometryError::DegenerateIntersection)));
    }

    #[test]
    fn projection_identity_random() {
        for s in 0..50 {
            let id = projection_identity_check(12, 3, 7, SeedSpec::new(8, s)).unwrap();
            assert!(id.relative_deviation() <= 1e-8, "{id:?}");
        }
    }

    #[test]
    fn projection_stats_extremes() {
        let full = projection_length_stats(6, 6, 20, SeedSpec::new(1, 0)).unwrap();
        assert!((full.mean_sq_ratio - 1.0).abs() < 1e-12 && full.std < 1e-12);
        assert!(projection_length_stats(6, 0, 20, SeedSpec::new(1, 0)).is_err());

        // k = d - 1: the ratio is 1 - <theta, v>^2 for the unit normal v.
        let d = 5;
        let theta = vec![1.0 / (d as f64).sqrt(); d];
        let g = sample_haar_orthonormal(d, d - 1, SeedSpec::new(2, 0).derive(0)).unwrap();
        let v = complement_basis(&g).unwrap().column(0);
        let direct: f64 = g.tr_matvec(&theta).iter().map(|x| x * x).sum();
        let via_normal = 1.0 - crate::linalg::dot(&theta, &v).powi(2);
        assert!((direct - via_normal).abs() < 1e-12);
        let one = projection_length_stats(d, d - 1, 1, SeedSpec::new(2, 0)).unwrap();
        assert!((one.mean_sq_ratio - via_normal).abs() < 1e-12);
    }
}
