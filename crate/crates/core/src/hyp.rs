//! Geometry of upper half-space H³ = {(z, t) : z ∈ ℂ, t > 0}.
//!
//! Isometries are PSL(2,ℂ) matrices acting by the Poincaré extension of the
//! Möbius action; planes are stored as generalized circles on ℂ ∪ {∞}.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::settings::NumericSettings;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// An element of PSL(2,ℂ), stored as a determinant-one representative.
#[derive(Debug, Clone, Copy)]
pub struct Isometry {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Isometry {
    /// Builds a matrix and divides it by a square root of its determinant.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = [a, b, c, d].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !(det.norm() > 1e-300) || det.norm() <= 1e-24 * scale || !det.is_finite() {
            return Err(Error::Degenerate("matrix is singular".into()));
        }
        let s = det.sqrt();
        Ok(Self { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    /// Real-entry convenience constructor.
    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    /// Wraps entries that are already known to have determinant one.
    pub fn from_sl2(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self { a: o, b: z, c: z, d: o }
    }

    /// The loxodromic element z ↦ e^{μ} z with axis (0, ∞), ∞ attracting when Re μ > 0.
    pub fn diagonal(mu: C64) -> Self {
        let h = (mu / 2.0).exp();
        Self::from_sl2(h, C64::new(0.0, 0.0), C64::new(0.0, 0.0), 1.0 / h)
    }

    pub fn translation(w: C64) -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self::from_sl2(o, w, z, o)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self::from_sl2(self.d, -self.b, -self.c, self.a)
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// tr², the sign-free trace invariant.
    pub fn trace_sq(&self) -> C64 {
        let t = self.trace();
        t * t
    }

    /// Squared Frobenius norm; equals 2·cosh d((0,0,1), m·(0,0,1)).
    pub fn frobenius_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    /// Re-divides by √det to wash out accumulated rounding.
    pub fn renormalized(&self) -> Self {
        Self::new(self.a, self.b, self.c, self.d).unwrap_or(*self)
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * sq;
            }
            sq = sq * sq;
            e >>= 1;
        }
        acc
    }

    /// Conjugate `g · self · g⁻¹`.
    pub fn conjugate_by(&self, g: &Isometry) -> Self {
        *g * *self * g.inverse()
    }

    /// Max entrywise distance to the nearer of `other` and `−other`.
    pub fn psl_distance(&self, other: &Isometry) -> f64 {
        let plus = [self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d];
        let minus = [self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d];
        let m = |v: [C64; 4]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        m(plus).min(m(minus))
    }

    /// Equality in PSL(2,ℂ): `M` and `−M` agree.
    pub fn approx_eq(&self, other: &Isometry, tol: f64) -> bool {
        self.psl_distance(other) <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Self::identity(), tol)
    }

    /// Möbius action on the boundary sphere.
    pub fn apply_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        match p {
            BoundaryPoint::Infinity => {
                if self.c == C64::new(0.0, 0.0) {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite(self.a / self.c)
                }
            }
            BoundaryPoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == C64::new(0.0, 0.0) {
                    BoundaryPoint::Infinity
                } else {
                    BoundaryPoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }
}

impl Mul for Isometry {
    type Output = Isometry;
    fn mul(self, o: Isometry) -> Isometry {
        Isometry::from_sl2(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl PartialEq for Isometry {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, 1e-12)
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// A point (x + iy, t) of upper half-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H3Point {
    pub z: C64,
    pub t: f64,
}

impl H3Point {
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() || !x.is_finite() || !y.is_finite() {
            return Err(Error::Invalid(format!("H3 point needs finite coordinates and t > 0, got t = {t}")));
        }
        Ok(Self { z: C64::new(x, y), t })
    }

    pub fn origin() -> Self {
        Self { z: C64::new(0.0, 0.0), t: 1.0 }
    }

    pub fn x(&self) -> f64 {
        self.z.re
    }

    pub fn y(&self) -> f64 {
        self.z.im
    }
}

/// A point of ∂H³ = ℂ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    Finite(C64),
    Infinity,
}

impl BoundaryPoint {
    /// Chordal distance on the Riemann sphere (diameter 2).
    pub fn chordal_distance(&self, other: &BoundaryPoint) -> f64 {
        use BoundaryPoint::*;
        match (self, other) {
            (Infinity, Infinity) => 0.0,
            (Finite(z), Infinity) | (Infinity, Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (Finite(z), Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
            }
        }
    }

    pub fn finite(&self) -> Option<C64> {
        match self {
            BoundaryPoint::Finite(z) => Some(*z),
            BoundaryPoint::Infinity => None,
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Finite(z) => write!(f, "{z}"),
            BoundaryPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// An oriented geodesic, from the repelling to the attracting endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicLine {
    pub repelling: BoundaryPoint,
    pub attracting: BoundaryPoint,
}

impl GeodesicLine {
    pub fn new(repelling: BoundaryPoint, attracting: BoundaryPoint) -> Result<Self> {
        if repelling.chordal_distance(&attracting) == 0.0 {
            return Err(Error::Degenerate("geodesic endpoints coincide".into()));
        }
        Ok(Self { repelling, attracting })
    }

    /// Same unoriented line, endpoints compared in the chordal metric.
    pub fn same_line(&self, other: &GeodesicLine, tol: f64) -> bool {
        let d = |p: &BoundaryPoint, q: &BoundaryPoint| p.chordal_distance(q);
        (d(&self.repelling, &other.repelling) < tol && d(&self.attracting, &other.attracting) < tol)
            || (d(&self.repelling, &other.attracting) < tol && d(&self.attracting, &other.repelling) < tol)
    }
}

/// A totally geodesic plane of H³ with a chosen side.
///
/// Stored as the boundary circle `a|z|² + b̄z + bz̄ + c = 0` with `a, c` real,
/// normalized so that `|b|² − ac = 1`. The inversive 4-vector is
/// `(a, Re b, Im b, c)` with Lorentz form `⟨w, w⟩ = w₁² + w₂² − w₀w₃`.
/// The signed side function is `F(z, t) = a(|z|² + t²) + 2 Re(b̄z) + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectorPlane {
    pub a: f64,
    pub b: C64,
    pub c: f64,
}

impl BisectorPlane {
    /// Normalizes a generalized circle; errors when it does not bound a plane.
    pub fn new(a: f64, b: C64, c: f64) -> Result<Self> {
        let n2 = b.norm_sqr() - a * c;
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::Degenerate("circle has non-positive inversive norm".into()));
        }
        let n = n2.sqrt();
        Ok(Self { a: a / n, b: b / n, c: c / n })
    }

    /// Hemisphere over the circle |z − center| = radius; the inside is negative.
    pub fn hemisphere(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Degenerate("radius must be positive".into()));
        }
        Self::new(1.0 / radius, -center / radius, (center.norm_sqr() - radius * radius) / radius)
    }

    /// Vertical plane over the line Re(b̄z) = −c/2.
    pub fn vertical(b: C64, c: f64) -> Result<Self> {
        Self::new(0.0, b, c)
    }

    pub fn inversive_coords(&self) -> [f64; 4] {
        [self.a, self.b.re, self.b.im, self.c]
    }

    pub fn lorentz_norm(&self) -> f64 {
        self.b.norm_sqr() - self.a * self.c
    }

    pub fn flipped(&self) -> Self {
        Self { a: -self.a, b: -self.b, c: -self.c }
    }

    pub fn side(&self, p: &H3Point) -> f64 {
        self.a * (p.z.norm_sqr() + p.t * p.t) + 2.0 * (self.b.conj() * p.z).re + self.c
    }

    /// Side function on the boundary, scaled to be bounded near ∞.
    fn boundary_side(&self, p: BoundaryPoint) -> f64 {
        match p {
            BoundaryPoint::Infinity => self.a,
            BoundaryPoint::Finite(z) => {
                (self.a * z.norm_sqr() + 2.0 * (self.b.conj() * z).re + self.c) / (1.0 + z.norm_sqr())
            }
        }
    }

    /// Inversive product; |⟨P,Q⟩| > 1 iff disjoint, equal to cosh of their distance.
    pub fn inversive_product(&self, o: &BisectorPlane) -> f64 {
        (self.b * o.b.conj()).re - 0.5 * (self.a * o.c + o.a * self.c)
    }

    pub fn is_vertical(&self) -> bool {
        self.a.abs() <= 1e-14 * (1.0 + self.b.norm() + self.c.abs())
    }

    /// Four points of the boundary circle, never ∞.
    pub fn boundary_samples(&self) -> [BoundaryPoint; 4] {
        use BoundaryPoint::Finite;
        if self.is_vertical() {
            // Line through z0 in direction i·b (|b| ≈ 1 after normalization).
            let nb = self.b / self.b.norm();
            let z0 = -self.c * self.b / (2.0 * self.b.norm_sqr());
            let dir = C64::new(0.0, 1.0) * nb;
            let s = 1.0 + z0.norm();
            [Finite(z0), Finite(z0 + dir * s), Finite(z0 - dir * s), Finite(z0 + dir * 2.0 * s)]
        } else {
            let center = -self.b / self.a;
            let r = 1.0 / self.a.abs();
            let i = C64::new(0.0, 1.0);
            [Finite(center + r), Finite(center - r), Finite(center + i * r), Finite(center - i * r)]
        }
    }

    /// Image of the plane under an isometry, preserving the chosen side.
    pub fn transformed(&self, g: &Isometry) -> Result<Self> {
        // The plane is the set where the Hermitian form with matrix
        // H = [[a, b], [b̄, c]] vanishes on (z, 1); the image has form g⁻* H g⁻¹.
        let gi = g.inverse();
        let (p, q, r, s) = (gi.a, gi.b, gi.c, gi.d);
        let h = [[C64::new(self.a, 0.0), self.b], [self.b.conj(), C64::new(self.c, 0.0)]];
        // M = gi, entries [[p, q], [r, s]]; result = Mᴴ H M.
        let m = [[p, q], [r, s]];
        let mut hm = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                hm[i][j] = h[i][0] * m[0][j] + h[i][1] * m[1][j];
            }
        }
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = m[0][i].conj() * hm[0][j] + m[1][i].conj() * hm[1][j];
            }
        }
        Self::new(out[0][0].re, out[0][1], out[1][1].re)
    }
}

/// Geometric type of an isometry together with its complex translation length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsometryClass {
    Identity,
    /// Rotation angle in [0, π].
    Elliptic { angle: f64 },
    Parabolic,
    /// Complex length μ = ℓ + iθ with θ = 0.
    Hyperbolic { mu: C64 },
    /// Complex length μ = ℓ + iθ with θ ∈ (−π, π].
    Loxodromic { mu: C64 },
}

impl IsometryClass {
    pub fn name(&self) -> &'static str {
        match self {
            IsometryClass::Identity => "identity",
            IsometryClass::Elliptic { .. } => "elliptic",
            IsometryClass::Parabolic => "parabolic",
            IsometryClass::Hyperbolic { .. } => "hyperbolic",
            IsometryClass::Loxodromic { .. } => "loxodromic",
        }
    }

    pub fn complex_length(&self) -> Option<C64> {
        match self {
            IsometryClass::Hyperbolic { mu } | IsometryClass::Loxodromic { mu } => Some(*mu),
            _ => None,
        }
    }

    pub fn has_axis(&self) -> bool {
        self.complex_length().is_some()
    }
}

/// Complex length 2·arccosh(tr/2) with Re ≥ 0 and imaginary part reduced to (−π, π].
pub fn complex_length(m: &Isometry) -> C64 {
    let mut mu = 2.0 * (m.trace() / 2.0).acosh();
    if mu.re < 0.0 {
        mu = -mu;
    }
    let mut th = mu.im.rem_euclid(TAU);
    if th > PI {
        th -= TAU;
    }
    C64::new(mu.re, th)
}

pub fn apply(m: &Isometry, p: &H3Point) -> H3Point {
    let czd = m.c * p.z + m.d;
    let t2 = p.t * p.t;
    let den = czd.norm_sqr() + m.c.norm_sqr() * t2;
    let num = (m.a * p.z + m.b) * czd.conj() + m.a * m.c.conj() * t2;
    H3Point { z: num / den, t: p.t / den }
}

pub fn classify(m: &Isometry, tol: f64) -> IsometryClass {
    let tr2 = m.trace_sq();
    if m.is_identity(tol) {
        return IsometryClass::Identity;
    }
    if (tr2 - 4.0).norm() < tol {
        return IsometryClass::Parabolic;
    }
    if tr2.im.abs() < tol {
        let r = tr2.re;
        if (0.0..4.0).contains(&r) || (r < 0.0 && r > -tol) {
            let half = (r.max(0.0).sqrt() / 2.0).min(1.0);
            return IsometryClass::Elliptic { angle: 2.0 * half.acos() };
        }
        if r > 4.0 {
            let mu = complex_length(m);
            return IsometryClass::Hyperbolic { mu: C64::new(mu.re, 0.0) };
        }
    }
    IsometryClass::Loxodromic { mu: complex_length(m) }
}

/// Real translation length, computed stably as 2·arccosh((|τ+1| + |τ−1|)/2), τ = tr/2.
pub fn translation_length(m: &Isometry) -> f64 {
    let tau = m.trace() / 2.0;
    let s = ((tau + 1.0).norm() + (tau - 1.0).norm()) / 2.0;
    2.0 * s.max(1.0).acosh()
}

pub fn axis(m: &Isometry, tol: f64) -> Result<GeodesicLine> {
    let class = classify(m, tol);
    if !class.has_axis() {
        return Err(Error::NoAxis(class.name()));
    }
    let zero = C64::new(0.0, 0.0);
    if m.c == zero {
        // z ↦ (az + b)/d fixes ∞ and b/(d − a); ∞ attracts iff |a/d| > 1.
        let finite = BoundaryPoint::Finite(m.b / (m.d - m.a));
        return if m.a.norm() > m.d.norm() {
            GeodesicLine::new(finite, BoundaryPoint::Infinity)
        } else {
            GeodesicLine::new(BoundaryPoint::Infinity, finite)
        };
    }
    let disc = (m.trace_sq() - 4.0).sqrt();
    let q1 = (m.a - m.d) + disc;
    let q2 = (m.a - m.d) - disc;
    let q = if q1.norm() >= q2.norm() { q1 } else { q2 };
    let z1 = q / (2.0 * m.c);
    let z2 = if q == zero { z1 } else { -2.0 * m.b / q };
    // Derivative at a fixed point z is 1/(cz + d)²; attracting iff |cz + d| > 1.
    let (p1, p2) = (BoundaryPoint::Finite(z1), BoundaryPoint::Finite(z2));
    if (m.c * z1 + m.d).norm() > (m.c * z2 + m.d).norm() {
        GeodesicLine::new(p2, p1)
    } else {
        GeodesicLine::new(p1, p2)
    }
}

pub fn h3_distance(p: &H3Point, q: &H3Point) -> f64 {
    let dz = p.z - q.z;
    let dt = p.t - q.t;
    let e = (dz.norm_sqr() + dt * dt).sqrt();
    2.0 * (e / (2.0 * (p.t * q.t).sqrt())).asinh()
}

/// Plane of points equidistant from `p` and `q`, oriented so `p` is on the negative side.
pub fn perpendicular_bisector(p: &H3Point, q: &H3Point) -> Result<BisectorPlane> {
    if h3_distance(p, q) < 1e-12 {
        return Err(Error::Degenerate("bisector of coincident points".into()));
    }
    let (z1, t1, z2, t2) = (p.z, p.t, q.z, q.t);
    // t₂·|X − p|² − t₁·|X − q|² (Euclidean) expands to the side function below;
    // it vanishes exactly where cosh d(X,p) = cosh d(X,q).
    let a = t2 - t1;
    let b = -(z1 * t2 - z2 * t1);
    let c = t2 * (z1.norm_sqr() + t1 * t1) - t1 * (z2.norm_sqr() + t2 * t2);
    let dz = z1 - z2;
    let n = (t1 * t2 * (dz.norm_sqr() + (t1 - t2) * (t1 - t2))).sqrt();
    Ok(BisectorPlane { a: a / n, b: b / n, c: c / n })
}

pub fn plane_distance(p1: &BisectorPlane, p2: &BisectorPlane) -> f64 {
    let x = p1.inversive_product(p2).abs();
    if x > 1.0 {
        x.acosh()
    } else {
        0.0
    }
}

/// Whether `p2` separates `p1` from `p3`.
///
/// Planes that meet transversally are rejected. Tangent planes (inversive
/// product ±1, e.g. parallel vertical planes, which touch at ∞) are accepted
/// because their boundary circles still lie in well-defined components.
pub fn plane_separates(
    p1: &BisectorPlane,
    p2: &BisectorPlane,
    p3: &BisectorPlane,
    settings: &NumericSettings,
) -> Result<bool> {
    for (x, y) in [(p1, p2), (p2, p3), (p1, p3)] {
        if x.inversive_product(y).abs() < 1.0 - settings.plane_tol {
            return Err(Error::PlanesNotDisjoint);
        }
    }
    let side_of = |p: &BisectorPlane| {
        p.boundary_samples()
            .into_iter()
            .map(|s| p2.boundary_side(s))
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best })
    };
    let s1 = side_of(p1);
    let s3 = side_of(p3);
    Ok(s1 * s3 < 0.0)
}
