//! Eigenvalue data, singular directions and the partial Poincaré /
//! non-resonance conditions that make a summation direction admissible.

use serde::Serialize;

use crate::borel_laplace::SectorSpec;
use crate::error::{Error, Result};
use crate::formal_series::MultiIndex;
use crate::linalg::CMat;
use crate::scalar::{angle_diff, cis, czero, from_usize, lit, to_f64, wrap_angle, Cx, Real};

/// Default relative eigenvalue separation below which eigenvalues count as equal.
pub const DEFAULT_SEP_TOL: f64 = 1e-10;
/// Default maximal `|m|` in the brute-force resonance search.
pub const DEFAULT_M_MAX: u32 = 40;

/// Eigenvalues of `A(0)` and the induced singular directions.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralData<T: Real> {
    pub eigenvalues: Vec<Cx<T>>,
    /// Unit eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: CMat<T>,
    pub gamma: u32,
    /// `(i, j, arg(λ_i − λ_j) ∈ [0, 2π))` for `i ≠ j`.
    pub omega_pairs: Vec<(usize, usize, T)>,
    /// Directions `(arg λ_i + 2πℓ)/γ`, sorted in `[0, 2π)`.
    pub theta0_dirs: Vec<T>,
    /// Directions `(arg(λ_i − λ_j) + 2πℓ)/γ`, sorted in `[0, 2π)`.
    pub theta1_dirs: Vec<T>,
    /// Differences `λ_i − λ_j`, `i ≠ j`.
    pub lambda_sharp: Vec<Cx<T>>,
}

/// Directions closer than this are merged.
const DIR_MERGE: f64 = 1e-12;

fn push_dirs<T: Real>(out: &mut Vec<T>, omega: T, gamma: u32) {
    let g = from_usize::<T>(gamma as usize);
    for l in 0..gamma {
        out.push(wrap_angle((omega + T::TAU() * from_usize::<T>(l as usize)) / g));
    }
}

fn sort_dedup<T: Real>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<T> = Vec::with_capacity(v.len());
    for d in v {
        if out.last().is_none_or(|&l| (d - l).abs() > lit(DIR_MERGE)) {
            out.push(d);
        }
    }
    if out.len() > 1 {
        let first = out[0];
        let last = *out.last().unwrap();
        if (first + T::TAU() - last).abs() <= lit(DIR_MERGE) {
            out.pop();
        }
    }
    out
}

impl<T: Real> SpectralData<T> {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Θ₀ ∪ Θ₁`, sorted and merged.
    pub fn singular_directions(&self) -> Vec<T> {
        let mut all = self.theta0_dirs.clone();
        all.extend(self.theta1_dirs.iter().copied());
        sort_dedup(all)
    }

    pub fn max_modulus(&self) -> T {
        self.eigenvalues.iter().map(|l| l.norm()).fold(T::zero(), T::max)
    }

    /// Build from known eigenvalues; eigenvectors default to the identity.
    pub fn from_eigenvalues(eigenvalues: Vec<Cx<T>>, gamma: u32, sep_tol: T) -> Result<Self> {
        let n = eigenvalues.len();
        let vecs = CMat::identity(n);
        Self::assemble(eigenvalues, vecs, gamma, sep_tol)
    }

    /// Reorder so that position `k` holds the old eigenvalue `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&j| j >= n || std::mem::replace(&mut seen[j], true)) {
            return Err(Error::Shape(format!("{order:?} is not a permutation of 0..{n}")));
        }
        let eigenvalues = order.iter().map(|&j| self.eigenvalues[j]).collect();
        let vecs = CMat::from_fn(n, n, |r, c| self.eigenvectors[(r, order[c])]);
        Self::assemble(eigenvalues, vecs, self.gamma, T::zero())
    }

    fn assemble(eigenvalues: Vec<Cx<T>>, eigenvectors: CMat<T>, gamma: u32, sep_tol: T) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::Precondition("Poincaré rank must be positive".into()));
        }
        let n = eigenvalues.len();
        let scale = eigenvalues.iter().map(|l| l.norm()).fold(T::zero(), T::max);
        for i in 0..n {
            for j in i + 1..n {
                let gap = (eigenvalues[i] - eigenvalues[j]).norm();
                if gap < sep_tol * scale.max(T::min_positive_value()) || gap == T::zero() {
                    return Err(Error::EigenvaluesNotSeparated {
                        i,
                        j,
                        gap: to_f64(gap),
                    });
                }
            }
        }
        let mut omega_pairs = Vec::new();
        let mut lambda_sharp = Vec::new();
        let mut t1 = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = eigenvalues[i] - eigenvalues[j];
                    let w = wrap_angle(d.arg());
                    omega_pairs.push((i, j, w));
                    lambda_sharp.push(d);
                    push_dirs(&mut t1, w, gamma);
                }
            }
        }
        let mut t0 = Vec::new();
        for l in &eigenvalues {
            if l.norm() > T::zero() {
                push_dirs(&mut t0, wrap_angle(l.arg()), gamma);
            }
        }
        Ok(SpectralData {
            eigenvalues,
            eigenvectors,
            gamma,
            omega_pairs,
            theta0_dirs: sort_dedup(t0),
            theta1_dirs: sort_dedup(t1),
            lambda_sharp,
        })
    }
}

/// Eigen-decomposition of `A(0)` with the default separation tolerance.
pub fn eigen_data<T: Real>(a0: &CMat<T>, gamma: u32) -> Result<SpectralData<T>> {
    eigen_data_with_tol(a0, gamma, lit(DEFAULT_SEP_TOL))
}

/// Eigen-decomposition of `A(0)`; `sep_tol` is relative to `max|λ|`.
pub fn eigen_data_with_tol<T: Real>(a0: &CMat<T>, gamma: u32, sep_tol: T) -> Result<SpectralData<T>> {
    if !a0.is_square() {
        return Err(Error::Shape(format!("A(0) is {}x{}", a0.rows(), a0.cols())));
    }
    let (values, vectors) = a0.eigen()?;
    SpectralData::assemble(values, vectors, gamma, sep_tol)
}

/// Outcome of the condition checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CertificateStatus<T: Real> {
    Passed,
    /// The subset does not fit in a sector of half-angle below `π/2`.
    SectorTooWide { half_angle: T },
    /// `Σ λ_j m_j = λ_i` up to tolerance.
    Resonant {
        component: usize,
        index: MultiIndex,
        value: T,
    },
    /// Every direction of the auxiliary `η` plane is obstructed.
    NoAdmissibleSector,
}

/// Finite certificate for Conditions 1 and 2 and the uniform lower bound.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionCertificate<T: Real> {
    pub subset: Vec<usize>,
    pub theta_lambda: T,
    pub delta_lambda: T,
    pub c_j: T,
    pub j_hat: SectorSpec<T>,
    pub checked_degree: u32,
    pub resonance_margin: T,
    /// `(i, m)` attaining the resonance margin.
    pub margin_witness: (usize, MultiIndex),
    /// Degree beyond which the geometric bound excludes resonances.
    pub tail_degree: u32,
    pub status: CertificateStatus<T>,
}

impl<T: Real> ConditionCertificate<T> {
    pub fn passed(&self) -> bool {
        self.status == CertificateStatus::Passed
    }
}

/// Smallest closed angular sector containing the given nonzero values:
/// `(centre, half_angle)`.
pub fn enclosing_sector<T: Real>(values: &[Cx<T>]) -> Option<(T, T)> {
    if values.is_empty() || values.iter().any(|v| v.norm() == T::zero()) {
        return None;
    }
    let mut args: Vec<T> = values.iter().map(|v| wrap_angle(v.arg())).collect();
    args.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = args.len();
    let mut best_gap = T::zero();
    let mut best_end = 0;
    for k in 0..n {
        let next = if k + 1 < n { args[k + 1] } else { args[0] + T::TAU() };
        let gap = next - args[k];
        if gap > best_gap {
            best_gap = gap;
            best_end = k;
        }
    }
    // sector runs from args[best_end+1] counter-clockwise to args[best_end]
    let start = args[(best_end + 1) % n];
    let width = T::TAU() - best_gap;
    let half = width / lit(2.0);
    if n == 1 {
        return Some((args[0], T::zero()));
    }
    Some((wrap_angle(start + half), half))
}

fn subset_values<T: Real>(spec: &SpectralData<T>, subset: &[usize]) -> Result<Vec<Cx<T>>> {
    if subset.is_empty() {
        return Err(Error::Precondition("eigenvalue subset is empty".into()));
    }
    subset
        .iter()
        .map(|&j| {
            spec.eigenvalues
                .get(j)
                .copied()
                .ok_or_else(|| Error::Shape(format!("subset index {j} out of range")))
        })
        .collect()
}

/// `λ_i − Σ_j λ_j m_j` for all `2 ≤ |m| ≤ m_max` and all `i`.
fn minus_l_points<T: Real>(spec: &SpectralData<T>, sub: &[Cx<T>], m_max: u32) -> Vec<(usize, MultiIndex, Cx<T>)> {
    let mut out = Vec::new();
    for m in MultiIndex::with_total_between(sub.len(), 2, m_max) {
        let s: Cx<T> = m
            .entries()
            .iter()
            .zip(sub)
            .map(|(&k, l)| l * from_usize::<T>(k as usize))
            .fold(czero(), |a, b| a + b);
        for (i, li) in spec.eigenvalues.iter().enumerate() {
            out.push((i, m.clone(), li - s));
        }
    }
    out
}

/// Closed arcs on the circle, as `(start, length)` with `start ∈ [0, 2π)`.
#[derive(Clone, Debug, Default)]
struct ArcSet<T: Real> {
    arcs: Vec<(T, T)>,
}

impl<T: Real> ArcSet<T> {
    fn point(&mut self, a: T) {
        self.arcs.push((wrap_angle(a), T::zero()));
    }

    fn arc(&mut self, centre: T, half: T) {
        if half >= T::PI() {
            self.arcs.push((T::zero(), T::TAU()));
        } else {
            self.arcs.push((wrap_angle(centre - half), half * lit(2.0)));
        }
    }

    /// Open gaps between forbidden arcs as `(start, width)`.
    fn gaps(&self) -> Vec<(T, T)> {
        if self.arcs.is_empty() {
            return vec![(T::zero(), T::TAU())];
        }
        if self.arcs.iter().any(|&(_, l)| l >= T::TAU()) {
            return Vec::new();
        }
        let mut arcs = self.arcs.clone();
        arcs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // merge into covered intervals on the unrolled line
        let mut merged: Vec<(T, T)> = Vec::new();
        for (s, l) in arcs {
            let e = s + l;
            match merged.last_mut() {
                Some(last) if s <= last.1 + lit(DIR_MERGE) => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        // wrap-around merge
        if merged.len() > 1 {
            let last_end = merged.last().unwrap().1;
            if last_end + lit(DIR_MERGE) >= merged[0].0 + T::TAU() {
                let first = merged.remove(0);
                let last = merged.last_mut().unwrap();
                last.1 = last.1.max(first.1 + T::TAU());
            }
        }
        let k = merged.len();
        let mut out = Vec::new();
        for idx in 0..k {
            let end = merged[idx].1;
            let next_start = if idx + 1 < k {
                merged[idx + 1].0
            } else {
                merged[0].0 + T::TAU()
            };
            let width = next_start - end;
            if width > lit(DIR_MERGE) {
                out.push((wrap_angle(end), width));
            }
        }
        out
    }

    fn distance(&self, theta: T) -> T {
        self.arcs
            .iter()
            .map(|&(s, l)| {
                let half = l / lit(2.0);
                (angle_diff(theta, s + half).abs() - half).max(T::zero())
            })
            .fold(T::PI(), T::min)
    }
}

/// Forbidden directions of the auxiliary plane `γη` (period `2π`).
fn eta_forbidden<T: Real>(
    spec: &SpectralData<T>,
    points: &[(usize, MultiIndex, Cx<T>)],
    theta_lambda: T,
    delta: T,
) -> ArcSet<T> {
    let mut set = ArcSet::default();
    for d in &spec.lambda_sharp {
        set.point(d.arg());
    }
    for (_, _, p) in points {
        if p.norm() > T::zero() {
            set.point(p.arg());
        }
    }
    set.arc(theta_lambda + T::PI(), delta);
    set
}

/// `min |γη + Σλm − λ_i| / (|η| + |m|)` over sampled `η ∈ S(Ĵ)`.
fn estimate_c_j<T: Real>(
    spec: &SpectralData<T>,
    points: &[(usize, MultiIndex, Cx<T>)],
    j_hat: &SectorSpec<T>,
) -> T {
    let g = from_usize::<T>(spec.gamma as usize);
    let scale = spec.max_modulus().max(T::min_positive_value());
    let mut radii = vec![T::zero()];
    for k in 0..25 {
        let e = lit::<T>(-3.0) + lit::<T>(6.0) * from_usize::<T>(k) / lit(24.0);
        radii.push(scale * lit::<T>(10.0).powf(e));
    }
    let mut best = T::infinity();
    for a in 0..9 {
        let ang = j_hat.lower() + (j_hat.upper() - j_hat.lower()) * from_usize::<T>(a) / lit(8.0);
        let dir = cis(ang);
        for &r in &radii {
            let eta = dir * r;
            for (_, m, p) in points {
                // p = λ_i − Σλm, so γη + Σλm − λ_i = γη − p
                let v = (eta * g - p).norm() / (r + from_usize::<T>(m.total() as usize));
                if v < best {
                    best = v;
                }
            }
        }
    }
    best
}

/// Verify Conditions 1 and 2 for `subset` up to `|m| ≤ m_max` and estimate
/// the lower-bound constant on an admissible auxiliary sector.
pub fn check_conditions<T: Real>(
    spec: &SpectralData<T>,
    subset: &[usize],
    m_max: u32,
) -> Result<ConditionCertificate<T>> {
    let sub = subset_values(spec, subset)?;
    let scale = spec.max_modulus();
    let res_tol = lit::<T>(DEFAULT_SEP_TOL) * scale.max(T::min_positive_value());
    let mut cert = ConditionCertificate {
        subset: subset.to_vec(),
        theta_lambda: T::zero(),
        delta_lambda: T::zero(),
        c_j: T::zero(),
        j_hat: SectorSpec::ray(T::zero()),
        checked_degree: m_max,
        resonance_margin: T::zero(),
        margin_witness: (0, MultiIndex::zeros(sub.len())),
        tail_degree: 0,
        status: CertificateStatus::Passed,
    };
    let Some((centre, half)) = enclosing_sector(&sub) else {
        cert.status = CertificateStatus::SectorTooWide { half_angle: T::PI() };
        return Ok(cert);
    };
    cert.theta_lambda = centre;
    cert.delta_lambda = half;
    if half >= T::FRAC_PI_2() - lit(1e-12) {
        cert.status = CertificateStatus::SectorTooWide { half_angle: half };
        return Ok(cert);
    }
    let points = minus_l_points(spec, &sub, m_max);
    let mut margin = T::infinity();
    for (i, m, p) in &points {
        let v = p.norm();
        if v < margin {
            margin = v;
            cert.margin_witness = (*i, m.clone());
        }
    }
    cert.resonance_margin = if points.is_empty() { T::infinity() } else { margin };
    let min_sub = sub.iter().map(|l| l.norm()).fold(T::infinity(), T::min);
    let bound = scale / (half.cos() * min_sub);
    cert.tail_degree = to_f64(bound.floor()).max(0.0) as u32 + 1;
    if cert.tail_degree > m_max {
        log::warn!(
            "resonance search to |m| = {m_max} does not reach the geometric tail degree {}",
            cert.tail_degree
        );
    }
    if margin <= res_tol {
        cert.status = CertificateStatus::Resonant {
            component: cert.margin_witness.0,
            index: cert.margin_witness.1.clone(),
            value: margin,
        };
        return Ok(cert);
    }
    let forbidden = eta_forbidden(spec, &points, centre, half);
    let gaps = forbidden.gaps();
    let chosen = gaps
        .iter()
        .map(|&(s, w)| (wrap_angle(s + w / lit(2.0)), w))
        .min_by(|a, b| {
            let da = angle_diff(a.0, centre).abs();
            let db = angle_diff(b.0, centre).abs();
            da.partial_cmp(&db).unwrap()
        });
    let Some((mid, width)) = chosen else {
        cert.status = CertificateStatus::NoAdmissibleSector;
        return Ok(cert);
    };
    cert.j_hat = SectorSpec::new(mid, width / lit(4.0), None)?;
    cert.c_j = estimate_c_j(spec, &points, &cert.j_hat);
    if !(cert.c_j > T::zero()) {
        cert.status = CertificateStatus::NoAdmissibleSector;
    }
    Ok(cert)
}

/// Chosen summation direction and the associated sectors.
#[derive(Clone, Debug, Serialize)]
pub struct DirectionChoice<T: Real> {
    pub theta_star: T,
    /// Angular distance from `θ*` to the nearest forbidden direction.
    pub margin: T,
    pub eps_star: T,
    /// `Î = (θ* − ε*, θ* + ε*)`.
    pub i_hat: SectorSpec<T>,
    /// `Î` widened by `π/(2γ)`.
    pub i_wide: SectorSpec<T>,
    /// `γ Î` in the auxiliary plane.
    pub j_hat: SectorSpec<T>,
    /// Lower-bound constant on `S(γÎ)`, when a certificate was supplied.
    pub c_j: Option<T>,
}

/// Tie tolerance when comparing gap widths.
const TIE_TOL: f64 = 1e-12;

/// Pick `θ*` maximising the distance to all forbidden directions. Without a
/// certificate only `Θ₀ ∪ Θ₁` is avoided.
pub fn choose_direction<T: Real>(
    spec: &SpectralData<T>,
    cert: Option<&ConditionCertificate<T>>,
    preferred: Option<T>,
) -> Result<DirectionChoice<T>> {
    let g = from_usize::<T>(spec.gamma as usize);
    let mut set = ArcSet::default();
    for d in spec.singular_directions() {
        set.point(d);
    }
    let mut points = Vec::new();
    if let Some(c) = cert {
        if !c.passed() {
            return Err(Error::Precondition(format!(
                "condition certificate did not pass: {:?}",
                c.status
            )));
        }
        let sub = subset_values(spec, &c.subset)?;
        points = minus_l_points(spec, &sub, c.checked_degree);
        for (_, _, p) in &points {
            if p.norm() > T::zero() {
                for l in 0..spec.gamma {
                    set.point((p.arg() + T::TAU() * from_usize::<T>(l as usize)) / g);
                }
            }
        }
        for l in 0..spec.gamma {
            set.arc(
                (c.theta_lambda + T::PI() + T::TAU() * from_usize::<T>(l as usize)) / g,
                c.delta_lambda / g,
            );
        }
    }
    let (theta_star, margin) = match preferred {
        Some(p) if set.distance(p) > lit(1e-9) => (wrap_angle(p), set.distance(p)),
        _ => {
            let gaps = set.gaps();
            if gaps.is_empty() {
                let dirs: Vec<f64> = spec.singular_directions().into_iter().map(to_f64).collect();
                return Err(Error::SearchFailure(dirs));
            }
            let widest = gaps.iter().map(|g| g.1).fold(T::zero(), T::max);
            let mut best: Option<T> = None;
            for &(s, w) in &gaps {
                if w >= widest * (T::one() - lit(TIE_TOL)) {
                    let mid = wrap_angle(s + w / lit(2.0));
                    best = Some(match best {
                        Some(b) if b <= mid => b,
                        _ => mid,
                    });
                }
            }
            let mid = best.expect("at least one widest gap");
            (mid, set.distance(mid).min(widest / lit(2.0)))
        }
    };
    if let Some(c) = cert {
        let sub = subset_values(spec, &c.subset)?;
        let min_sub = sub.iter().map(|l| l.norm()).fold(T::infinity(), T::min);
        let ratio = spec.max_modulus() / (c.delta_lambda.cos() * min_sub * from_usize::<T>(c.checked_degree as usize));
        let spread = ratio.min(T::one()).asin() / g;
        let cone_gap = (0..spec.gamma)
            .map(|l| {
                let centre = (c.theta_lambda + T::PI() + T::TAU() * from_usize::<T>(l as usize)) / g;
                angle_diff(theta_star, centre).abs() - c.delta_lambda / g
            })
            .fold(T::PI(), T::min);
        if cone_gap < spread {
            log::warn!("θ* lies within the unchecked spread of the asymptotic cone");
        }
    }
    let eps_star = margin / lit(2.0);
    let i_hat = SectorSpec::new(theta_star, eps_star, None)?;
    let i_wide = SectorSpec::new(theta_star, eps_star + T::FRAC_PI_2() / g, None)?;
    let j_hat = SectorSpec::new(wrap_angle(theta_star * g), eps_star * g, None)?;
    let c_j = if cert.is_some() {
        Some(estimate_c_j(spec, &points, &j_hat))
    } else {
        None
    };
    Ok(DirectionChoice {
        theta_star,
        margin,
        eps_star,
        i_hat,
        i_wide,
        j_hat,
        c_j,
    })
}

/// Decay region `∩_{i ∈ Λ′} {θ : |γθ − ω_i| < π/2 − ε}` on the branch
/// containing `θ_Λ/γ`.
pub fn decay_region<T: Real>(spec: &SpectralData<T>, subset: &[usize], eps: T) -> Result<SectorSpec<T>> {
    let sub = subset_values(spec, subset)?;
    let (centre, _) = enclosing_sector(&sub)
        .ok_or_else(|| Error::NoHalfPlane("zero eigenvalue in subset".into()))?;
    decay_region_near(spec, subset, eps, centre / from_usize::<T>(spec.gamma as usize))
}

/// Decay region on the branch closest to `direction`.
pub fn decay_region_near<T: Real>(
    spec: &SpectralData<T>,
    subset: &[usize],
    eps: T,
    direction: T,
) -> Result<SectorSpec<T>> {
    let sub = subset_values(spec, subset)?;
    let g = from_usize::<T>(spec.gamma as usize);
    let half = (T::FRAC_PI_2() - eps) / g;
    if !(half > T::zero()) {
        return Err(Error::NoHalfPlane(format!(
            "decay margin ε = {} leaves no sector",
            to_f64(eps)
        )));
    }
    let (centre, _) = enclosing_sector(&sub)
        .ok_or_else(|| Error::NoHalfPlane("zero eigenvalue in subset".into()))?;
    // branch ℓ with (centre + 2πℓ)/γ closest to `direction`
    let mut anchor = centre / g;
    let mut best = angle_diff(anchor, direction).abs();
    for l in 1..spec.gamma {
        let a = (centre + T::TAU() * from_usize::<T>(l as usize)) / g;
        let d = angle_diff(a, direction).abs();
        if d < best {
            best = d;
            anchor = a;
        }
    }
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    for l in &sub {
        let c = anchor + angle_diff(l.arg(), centre) / g;
        lo = lo.max(c - half);
        hi = hi.min(c + half);
    }
    if !(hi > lo) {
        return Err(Error::NoHalfPlane("decay strips do not intersect".into()));
    }
    SectorSpec::new((lo + hi) / lit(2.0), (hi - lo) / lit(2.0), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Cx<f64> {
        cx(re, im)
    }

    fn close_sets(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn painleve_two_directions() {
        let a0 = CMat::diag(&[c(2.0, 0.0), c(-2.0, 0.0)]);
        let s = eigen_data(&a0, 3).unwrap();
        let expect: Vec<f64> = (0..6).map(|l| PI * l as f64 / 3.0).collect();
        assert!(close_sets(&s.singular_directions(), &expect, 1e-14));
    }

    #[test]
    fn single_eigenvalue() {
        let s = eigen_data(&CMat::diag(&[c(1.0, 0.0)]), 1).unwrap();
        assert_eq!(s.theta0_dirs, vec![0.0]);
        assert!(s.theta1_dirs.is_empty());
    }

    #[test]
    fn p4_branch_matrix() {
        let cc = -2.0;
        let a0 = CMat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(-4.0 * (cc + 1.0), 0.0), c(0.0, 0.0)]]).unwrap();
        let s = eigen_data(&a0, 2).unwrap();
        let mut re: Vec<f64> = s.eigenvalues.iter().map(|l| l.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] + 2.0).abs() < 1e-14 && (re[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_eigenvalues_rejected() {
        let a0 = CMat::diag(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(eigen_data(&a0, 1), Err(Error::EigenvaluesNotSeparated { .. })));
    }

    #[test]
    fn condition_examples() {
        let s = SpectralData::from_eigenvalues(vec![c(2.0, 0.0), c(-2.0, 0.0)], 3, 1e-10).unwrap();
        let cert = check_conditions(&s, &[0], 40).unwrap();
        assert!(cert.passed());
        assert!((cert.resonance_margin - 2.0).abs() < 1e-14);
        assert!(cert.c_j > 0.0);

        let s = SpectralData::from_eigenvalues(vec![c(1.0, 0.0), c(1.0, 1.0)], 1, 1e-10).unwrap();
        let cert = check_conditions(&s, &[0, 1], 10).unwrap();
        assert!(cert.passed());
        assert!((cert.delta_lambda - PI / 8.0).abs() < 1e-14);

        let s = SpectralData::from_eigenvalues(vec![c(1.0, 0.0), c(-1.0, 0.0)], 1, 1e-10).unwrap();
        let cert = check_conditions(&s, &[0, 1], 10).unwrap();
        assert!(matches!(cert.status, CertificateStatus::SectorTooWide { .. }));

        let s = SpectralData::from_eigenvalues(vec![c(1.0, 0.0), c(2.0, 0.0)], 1, 1e-10).unwrap();
        let cert = check_conditions(&s, &[0], 10).unwrap();
        assert!(matches!(cert.status, CertificateStatus::Resonant { component: 1, .. }));
        assert!(check_conditions(&s, &[], 10).is_err());
    }

    #[test]
    fn direction_examples() {
        let s = SpectralData::from_eigenvalues(vec![c(2.0, 0.0), c(-2.0, 0.0)], 3, 1e-10).unwrap();
        let d = choose_direction(&s, None, None).unwrap();
        assert!((d.theta_star - PI / 6.0).abs() < 1e-12);
        assert!((d.margin - PI / 6.0).abs() < 1e-12);
        let cert = check_conditions(&s, &[0], 40).unwrap();
        let d = choose_direction(&s, Some(&cert), None).unwrap();
        assert!((d.theta_star - PI / 6.0).abs() < 1e-12);
        assert!(d.c_j.unwrap() > 0.0);

        let s1 = SpectralData::from_eigenvalues(vec![c(1.0, 0.0)], 1, 1e-10).unwrap();
        let d = choose_direction(&s1, None, None).unwrap();
        assert!((d.theta_star - PI).abs() < 1e-12);
        let d = choose_direction(&s1, None, Some(0.7)).unwrap();
        assert_eq!(d.theta_star, 0.7);
    }

    #[test]
    fn decay_examples() {
        let s = SpectralData::from_eigenvalues(vec![c(2.0, 0.0), c(-2.0, 0.0)], 3, 1e-10).unwrap();
        let r = decay_region(&s, &[0], 0.1).unwrap();
        assert!(r.theta.abs() < 1e-15);
        assert!((r.half_width - (PI / 2.0 - 0.1) / 3.0).abs() < 1e-15);
        let s = SpectralData::from_eigenvalues(vec![c(1.0, 0.0), Cx::from_polar(1.0, PI / 4.0)], 1, 1e-10).unwrap();
        let r = decay_region(&s, &[0, 1], 0.1).unwrap();
        assert!((r.lower() - (PI / 4.0 - PI / 2.0 + 0.1)).abs() < 1e-14);
        assert!((r.upper() - (PI / 2.0 - 0.1)).abs() < 1e-14);
        assert!(decay_region(&s, &[0], PI / 2.0).is_err());
    }

    fn arb_eigs() -> impl Strategy<Value = Vec<Cx<f64>>> {
        proptest::collection::vec((0.5f64..3.0, 0.0f64..(2.0 * PI)), 2..4)
            .prop_map(|v| v.into_iter().map(|(r, a)| Cx::from_polar(r, a)).collect())
    }

    proptest! {
        #[test]
        fn relabeling_invariance(eigs in arb_eigs(), gamma in 1u32..4) {
            let mut rev = eigs.clone();
            rev.reverse();
            let a = SpectralData::from_eigenvalues(eigs, gamma, 1e-6);
            let b = SpectralData::from_eigenvalues(rev, gamma, 1e-6);
            if let (Ok(a), Ok(b)) = (a, b) {
                prop_assert!(close_sets(&a.theta1_dirs, &b.theta1_dirs, 1e-12));
                prop_assert!(close_sets(&a.theta0_dirs, &b.theta0_dirs, 1e-12));
            }
        }

        #[test]
        fn rotation_covariance(eigs in arb_eigs(), gamma in 1u32..4, alpha in 0.0f64..1.0) {
            let rot: Vec<Cx<f64>> = eigs.iter().map(|l| l * Cx::from_polar(1.0, alpha)).collect();
            if let (Ok(a), Ok(b)) = (SpectralData::from_eigenvalues(eigs, gamma, 1e-6), SpectralData::from_eigenvalues(rot, gamma, 1e-6)) {
                let mut shifted: Vec<f64> = a.theta1_dirs.iter().map(|d| wrap_angle(d + alpha / gamma as f64)).collect();
                shifted.sort_by(|x, y| x.partial_cmp(y).unwrap());
                let ok = shifted.iter().all(|d| b.theta1_dirs.iter().any(|e| angle_diff(*d, *e).abs() < 1e-12));
                prop_assert!(ok && shifted.len() == b.theta1_dirs.len());
            }
        }

        #[test]
        fn direction_keeps_margin(eigs in arb_eigs(), gamma in 1u32..4) {
            if let Ok(s) = SpectralData::from_eigenvalues(eigs, gamma, 1e-6) {
                let d = choose_direction(&s, None, None).unwrap();
                let dist = s.singular_directions().iter().map(|t| angle_diff(d.theta_star, *t).abs()).fold(PI, f64::min);
                prop_assert!(dist >= d.eps_star && d.eps_star > 0.0);
                let cert = check_conditions(&s, &[0], 12).unwrap();
                if cert.passed() {
                    let d = choose_direction(&s, Some(&cert), None).unwrap();
                    prop_assert!(d.eps_star > 0.0);
                }
            }
        }

        #[test]
        fn certificate_reverification(eigs in arb_eigs(), m_max in 2u32..12) {
            let s = SpectralData::from_eigenvalues(eigs, 1, 1e-6);
            if let Ok(s) = s {
                let cert = check_conditions(&s, &[0, 1], m_max).unwrap();
                if matches!(cert.status, CertificateStatus::SectorTooWide { .. }) {
                    return Ok(());
                }
                let (l0, l1) = (s.eigenvalues[0], s.eigenvalues[1]);
                let mut best = f64::INFINITY;
                for a in 0..=m_max {
                    for b in 0..=(m_max - a) {
                        if a + b < 2 { continue; }
                        let sum = l0 * a as f64 + l1 * b as f64;
                        for li in &s.eigenvalues {
                            best = best.min((sum - li).norm());
                        }
                        if cert.passed() || matches!(cert.status, CertificateStatus::NoAdmissibleSector) {
                            let lower = cert.delta_lambda.cos() * (a + b) as f64 * l0.norm().min(l1.norm());
                            prop_assert!(sum.norm() >= lower * (1.0 - 1e-12));
                        }
                    }
                }
                prop_assert_eq!(best, cert.resonance_margin);
            }
        }
    }
}
