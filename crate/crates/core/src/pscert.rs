//! Primitive-stability certification by plane separation along quasi-axes.

use std::fmt;

use rayon::prelude::*;

use crate::charlab::Representation;
use crate::error::{Error, Result};
use crate::hyp::{apply, h3_distance, perpendicular_bisector, plane_distance, plane_separates, translation_length, H3Point, Isometry};
use crate::primitives::PrimitiveClass;
use crate::settings::{self, NumericSettings};
use crate::words::{cayley_translation_length, Automorphism, CayleyBall, GeodesicPath, Word};

/// The orbit map τ(g) = ρ(g)·x on Cayley-graph vertices.
#[derive(Clone, Debug)]
pub struct OrbitMap {
    pub rep: Representation,
    pub base: H3Point,
}

impl OrbitMap {
    pub fn new(rep: Representation, base: H3Point) -> Result<Self> {
        Self::with_bound(rep, base, settings::RESIDUAL_BOUND)
    }

    pub fn with_bound(rep: Representation, base: H3Point, residual_bound: f64) -> Result<Self> {
        if !(rep.residual < residual_bound) {
            return Err(Error::Invalid(format!(
                "relator residual {:e} exceeds bound {:e}",
                rep.residual, residual_bound
            )));
        }
        Ok(Self { rep, base })
    }

    pub fn at_origin(rep: Representation) -> Result<Self> {
        Self::new(rep, H3Point::origin())
    }

    /// ρ of the path segment from vertex `from` to vertex `to`.
    fn segment(&self, path: &GeodesicPath, from: i64, to: i64) -> Isometry {
        let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
        let m = (lo..hi).fold(Isometry::identity(), |acc, n| acc * self.rep.letter(path.step(n)));
        if from <= to {
            m
        } else {
            m.inverse()
        }
    }

    /// Lipschitz constant of the orbit map: max generator displacement of x.
    pub fn lipschitz(&self) -> f64 {
        self.rep.gens.iter().map(|g| h3_distance(&self.base, &apply(g, &self.base))).fold(0.0, f64::max)
    }
}

pub fn orbit_point(om: &OrbitMap, w: &Word) -> H3Point {
    apply(&om.rep.image(w), &om.base)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneCriterionParams {
    /// Vertex stride i.
    pub stride: usize,
    /// Required gap c between consecutive planes.
    pub gap: f64,
    /// Periods of the quasi-axis materialized on each side of the identity.
    pub window: usize,
}

impl Default for PlaneCriterionParams {
    fn default() -> Self {
        Self { stride: 1, gap: settings::CERT_GAP, window: settings::WINDOW }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QGConstants {
    pub k: f64,
    pub a: f64,
}

/// Outcome of the plane criterion on one path at one stride.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneCheck {
    pub pass: bool,
    /// Separation failed, planes met, or stride endpoints coincided.
    pub structural_failure: bool,
    /// Smallest gap seen between consecutive planes (0 once planes meet).
    pub min_gap: f64,
    /// First window start (vertex index) where the check failed.
    pub fail_index: Option<i64>,
}

/// Checks that consecutive bisector planes of the stride points are nested
/// with gaps above `params.gap`.
///
/// Each window of four stride points starting at vertex s is evaluated in
/// coordinates centered at its middle vertex, i.e. with points
/// ρ(vertex_m)⁻¹ρ(vertex_{s+ji})·x; this is an isometric image of the window,
/// so separation and gaps are unchanged while precision is kept. Windows
/// starting one period apart are translates of each other, so the phases
/// s = 0..period cover every window of the materialized path.
pub fn check_plane_criterion(
    om: &OrbitMap,
    path: &GeodesicPath,
    params: &PlaneCriterionParams,
    settings: &NumericSettings,
) -> PlaneCheck {
    let i = params.stride.max(1) as i64;
    let mut min_gap = f64::INFINITY;
    let mut argmin = 0;
    let fail = |s: i64, min_gap: f64| PlaneCheck { pass: false, structural_failure: true, min_gap, fail_index: Some(s) };
    for s in 0..path.period_len() as i64 {
        let mid = s + (3 * i) / 2;
        let v: Vec<H3Point> = (0..4).map(|j| apply(&om.segment(path, mid, s + j * i), &om.base)).collect();
        let mut planes = Vec::with_capacity(3);
        for j in 0..3 {
            if h3_distance(&v[j], &v[j + 1]) < settings.degenerate_tol {
                return fail(s, 0.0);
            }
            match perpendicular_bisector(&v[j], &v[j + 1]) {
                Ok(p) => planes.push(p),
                Err(_) => return fail(s, 0.0),
            }
        }
        let g01 = plane_distance(&planes[0], &planes[1]);
        let g12 = plane_distance(&planes[1], &planes[2]);
        if g01.min(g12) < min_gap {
            min_gap = g01.min(g12);
            argmin = s;
        }
        if g01 <= 0.0 || g12 <= 0.0 {
            return fail(s, 0.0);
        }
        match plane_separates(&planes[0], &planes[1], &planes[2], settings) {
            Ok(true) => {}
            _ => return fail(s, min_gap),
        }
    }
    let pass = min_gap > params.gap;
    PlaneCheck { pass, structural_failure: false, min_gap, fail_index: if pass { None } else { Some(argmin) } }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QgCheck {
    pub pass: bool,
    /// (s, t, d(α(s), α(t)) − (|s−t|/K − A)) for the pair with least slack.
    pub worst: Option<(i64, i64, f64)>,
}

/// Direct test of (1/K)|s−t| − A ≤ d(α(s), α(t)) over all vertex pairs of the
/// materialized path with |s − t| ≤ span.
pub fn brute_force_qg_check(om: &OrbitMap, path: &GeodesicPath, k: &QGConstants, span: usize) -> QgCheck {
    let (first, last) = (path.first_index(), path.last_index());
    let mut worst: Option<(i64, i64, f64)> = None;
    for s in first..last {
        let mut m = Isometry::identity();
        for t in s + 1..=(s + span as i64).min(last) {
            m = m * om.rep.letter(path.step(t - 1));
            let d = h3_distance(&om.base, &apply(&m, &om.base));
            let slack = d - ((t - s) as f64 / k.k - k.a);
            if worst.map_or(true, |w| slack < w.2) {
                worst = Some((s, t, slack));
            }
        }
    }
    QgCheck { pass: worst.map_or(true, |w| w.2 >= 0.0), worst }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Failed,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "certified",
            Verdict::Failed => "failed",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicSuspect {
    pub word: Word,
    pub orientation: i8,
    pub trace_sq: num_complex::Complex64,
}

pub fn detect_parabolic_primitives(om: &OrbitMap, prims: &[PrimitiveClass], tol: f64) -> Vec<ParabolicSuspect> {
    prims
        .iter()
        .filter_map(|c| {
            let m = om.rep.image(&c.word);
            let t2 = m.trace_sq();
            ((t2 - 4.0).norm() < tol && !m.is_identity(settings::CLASS_TOL))
                .then(|| ParabolicSuspect { word: c.word.clone(), orientation: c.orientation, trace_sq: t2 })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioStats {
    pub r_emp: f64,
    pub r_max: f64,
    pub r_lip: f64,
}

/// min/max of ℓ(ρ(w))/‖w‖ over the classes, and the orbit-map Lipschitz constant.
pub fn ratio_stats(om: &OrbitMap, ball: &CayleyBall, prims: &[PrimitiveClass]) -> Result<RatioStats> {
    let lengths: Vec<usize> = prims.iter().map(|c| cayley_translation_length(ball, &c.word)).collect::<Result<_>>()?;
    Ok(ratio_stats_with_lengths(om, prims, &lengths))
}

fn ratio_stats_with_lengths(om: &OrbitMap, prims: &[PrimitiveClass], lengths: &[usize]) -> RatioStats {
    let mut r_emp = f64::INFINITY;
    let mut r_max: f64 = 0.0;
    for (c, &n) in prims.iter().zip(lengths) {
        let q = translation_length(&om.rep.image(&c.word)) / n.max(1) as f64;
        r_emp = r_emp.min(q);
        r_max = r_max.max(q);
    }
    if prims.is_empty() {
        r_emp = f64::NAN;
        r_max = f64::NAN;
    }
    RatioStats { r_emp, r_max, r_lip: om.lipschitz() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordCert {
    pub word: Word,
    pub length: usize,
    /// Smallest stride at which the word passed, else the globally chosen stride.
    pub stride: usize,
    pub min_gap: f64,
    pub verdict: Verdict,
    pub fail_index: Option<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub word: Word,
    pub window_index: Option<i64>,
    pub reason: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertResult {
    pub verdict: Verdict,
    /// Stride the verdict refers to.
    pub stride: usize,
    /// Global min gap at that stride; `None` when no plane was tested.
    pub min_gap: Option<f64>,
    pub words: Vec<WordCert>,
    pub witness: Option<Witness>,
    /// (K, A) = (i·R_lip/min_gap, 2·i·R_lip), reported when certified.
    pub qg: Option<QGConstants>,
    pub ratios: RatioStats,
    pub parabolic: Vec<ParabolicSuspect>,
    pub params: PlaneCriterionParams,
    pub auto_tune: bool,
    pub max_len: usize,
    pub depth: Option<usize>,
}

fn word_verdict(chk: &PlaneCheck) -> Verdict {
    if chk.pass {
        Verdict::Certified
    } else if chk.structural_failure {
        Verdict::Failed
    } else {
        Verdict::Inconclusive
    }
}

/// Runs the plane criterion on the quasi-axis of every class.
///
/// With `auto_tune` the strides 1..=4 are tried and the first at which every
/// class passes is used; failing that, the first stride with only gap misses
/// (Inconclusive), else the stride with the fewest structural failures
/// (Failed). A parabolic primitive forces Failed with that class as witness.
pub fn certify(
    om: &OrbitMap,
    prims: &[PrimitiveClass],
    params: &PlaneCriterionParams,
    auto_tune: bool,
    settings: &NumericSettings,
) -> CertResult {
    let strides: Vec<usize> = if auto_tune { (1..=settings::MAX_STRIDE).collect() } else { vec![params.stride] };
    let checks: Vec<Vec<PlaneCheck>> = prims
        .par_iter()
        .map(|c| {
            let path = GeodesicPath { period: c.word.clone(), windows: params.window };
            let mut out = Vec::with_capacity(strides.len());
            for &i in &strides {
                out.push(check_plane_criterion(om, &path, &PlaneCriterionParams { stride: i, ..*params }, settings));
            }
            out
        })
        .collect();

    let mut chosen = 0usize;
    let status = |k: usize| -> (usize, usize) {
        let failed = checks.iter().filter(|c| c[k].structural_failure).count();
        let missed = checks.iter().filter(|c| !c[k].pass).count();
        (failed, missed)
    };
    let stats: Vec<(usize, usize)> = (0..strides.len()).map(status).collect();
    if let Some(k) = stats.iter().position(|s| s.1 == 0) {
        chosen = k;
    } else if let Some(k) = stats.iter().position(|s| s.0 == 0) {
        chosen = k;
    } else if let Some(k) = (0..strides.len()).min_by_key(|&k| stats[k].0) {
        chosen = k;
    }
    let stride = strides[chosen];

    let words: Vec<WordCert> = prims
        .iter()
        .zip(&checks)
        .map(|(c, chk)| {
            let best = chk.iter().position(|x| x.pass).unwrap_or(chosen);
            WordCert {
                word: c.word.clone(),
                length: c.length,
                stride: strides[best],
                min_gap: chk[best].min_gap,
                verdict: word_verdict(&chk[best]),
                fail_index: chk[best].fail_index,
            }
        })
        .collect();

    let min_gap = checks.iter().map(|c| c[chosen].min_gap).reduce(f64::min);
    let parabolic = detect_parabolic_primitives(om, prims, settings.parabolic_tol);
    let lengths: Vec<usize> = prims.iter().map(|c| c.length).collect();
    let ratios = ratio_stats_with_lengths(om, prims, &lengths);

    let (verdict, witness) = if let Some(p) = parabolic.first() {
        (Verdict::Failed, Some(Witness { word: p.word.clone(), window_index: None, reason: "parabolic" }))
    } else if stats[chosen].1 == 0 {
        (Verdict::Certified, None)
    } else {
        let structural = stats[chosen].0 > 0;
        let (c, chk) = prims
            .iter()
            .zip(&checks)
            .find(|(_, chk)| if structural { chk[chosen].structural_failure } else { !chk[chosen].pass })
            .expect("a failing class exists");
        let w = Witness {
            word: c.word.clone(),
            window_index: chk[chosen].fail_index,
            reason: if structural { "separation" } else { "gap" },
        };
        (if structural { Verdict::Failed } else { Verdict::Inconclusive }, Some(w))
    };
    let qg = (verdict == Verdict::Certified)
        .then(|| min_gap.filter(|g| g.is_finite() && *g > 0.0))
        .flatten()
        .map(|g| QGConstants { k: stride as f64 * ratios.r_lip / g, a: 2.0 * stride as f64 * ratios.r_lip });
    CertResult {
        verdict,
        stride,
        min_gap,
        words,
        witness,
        qg,
        ratios,
        parabolic,
        params: PlaneCriterionParams { stride, ..*params },
        auto_tune,
        max_len: prims.iter().map(|c| c.length).max().unwrap_or(0),
        depth: prims.iter().filter_map(|c| c.verified_depth).max(),
    }
}

/// The test words: generators and products x_i·x_j with i ≠ j.
pub fn test_words(ball: &CayleyBall) -> Vec<Word> {
    let n = ball.presentation.rank();
    let mut out: Vec<Word> = ball.presentation.generators();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(Word::generator(i).mul(&Word::generator(j)));
            }
        }
    }
    out
}

/// max over test words w of ‖f(w)‖/‖w‖.
pub fn wordset_distortion(f: &Automorphism, ball: &CayleyBall) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for w in test_words(ball) {
        let num = cayley_translation_length(ball, &f.apply(&w))?;
        let den = cayley_translation_length(ball, &w)?;
        if den > 0 {
            worst = worst.max(num as f64 / den as f64);
        }
    }
    Ok(worst)
}
