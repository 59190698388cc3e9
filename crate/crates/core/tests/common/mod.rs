//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use num_complex::Complex64 as C64;
use pstab::hyp::H3Point;
use pstab::words::{Letter, Word};

/// Distance via the hyperboloid model: ⟨X, Y⟩ = X₀Y₀ − X₁Y₁ − X₂Y₂ − X₃Y₃.
pub fn hyperboloid_distance(p: &H3Point, q: &H3Point) -> f64 {
    let lift = |p: &H3Point| {
        let r2 = p.z.norm_sqr() + p.t * p.t;
        [(r2 + 1.0) / (2.0 * p.t), p.z.re / p.t, p.z.im / p.t, (r2 - 1.0) / (2.0 * p.t)]
    };
    let (x, y) = (lift(p), lift(q));
    let b = x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3];
    b.max(1.0).acosh()
}

/// Point on the hemisphere |z − c|² + t² = r² at polar angle θ from the top.
pub fn hemisphere_point(c: C64, r: f64, theta: f64, phi: f64) -> H3Point {
    let z = c + C64::from_polar(r * theta.sin(), phi);
    H3Point { z, t: r * theta.cos() }
}

/// Hooke–Jeeves pattern search; returns (argmin, min).
pub fn pattern_search<const N: usize>(f: impl Fn(&[f64; N]) -> f64, mut x: [f64; N], mut step: f64, tol: f64) -> ([f64; N], f64) {
    let mut fx = f(&x);
    while step > tol {
        let mut improved = false;
        for k in 0..N {
            for s in [step, -step] {
                let mut y = x;
                y[k] += s;
                let fy = f(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Distance between two disjoint hemispheres by direct minimization over
/// point pairs.
pub fn sampled_plane_distance(c1: C64, r1: f64, c2: C64, r2: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, TAU};
    let clamp = |th: f64| th.clamp(0.0, FRAC_PI_2 - 1e-9);
    let f = |v: &[f64; 4]| {
        hyperboloid_distance(&hemisphere_point(c1, r1, clamp(v[0]), v[1]), &hemisphere_point(c2, r2, clamp(v[2]), v[3]))
    };
    let mut best = ([0.0; 4], f64::INFINITY);
    let n = 8;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = [
                        FRAC_PI_2 * i as f64 / n as f64,
                        TAU * j as f64 / n as f64,
                        FRAC_PI_2 * k as f64 / n as f64,
                        TAU * l as f64 / n as f64,
                    ];
                    let d = f(&v);
                    if d < best.1 {
                        best = (v, d);
                    }
                }
            }
        }
    }
    pattern_search(f, best.0, 0.2, 1e-9).1
}

pub fn letters(rank: usize) -> Vec<Letter> {
    (0..2 * rank).map(|i| Letter::new(i / 2, i % 2 == 1)).collect()
}

/// Number of reduced words of each length ≤ radius, by explicit enumeration.
pub fn free_sphere_sizes(rank: usize, radius: usize) -> Vec<usize> {
    let mut sizes = vec![1];
    let mut frontier: Vec<Vec<Letter>> = vec![vec![]];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for l in letters(rank) {
                if w.last() != Some(&l.inv()) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        sizes.push(next.len());
        frontier = next;
    }
    sizes
}

/// Least rotation of w and of w⁻¹ (a cyclically reduced free word).
pub fn free_class(w: &Word) -> Word {
    let core = pstab::words::cyclic_reduce(w).0;
    let mut best = core.clone();
    for v in [core.clone(), core.inverse()] {
        for k in 0..v.len() {
            best = best.min(v.rotate(k));
        }
    }
    best
}

/// Whitehead automorphisms of ⟨a, b⟩: permutations/inversions of the
/// generators and, for each multiplier x ∈ {a^±, b^±}, y ↦ yx, x⁻¹y, x⁻¹yx.
fn whitehead_moves() -> Vec<[Word; 2]> {
    let g = |i: usize, inv: bool| Word::new(&[Letter::new(i, inv)]);
    let mut moves = Vec::new();
    for swap in [false, true] {
        for ia in [false, true] {
            for ib in [false, true] {
                let (x, y) = if swap { (1, 0) } else { (0, 1) };
                moves.push([g(x, ia), g(y, ib)]);
            }
        }
    }
    for xg in 0..2 {
        for xinv in [false, true] {
            let x = g(xg, xinv);
            let xi = x.inverse();
            let y = g(1 - xg, false);
            for img in [y.mul(&x), xi.mul(&y), xi.mul(&y).mul(&x)] {
                let mut m = [g(0, false), g(1, false)];
                m[1 - xg] = img;
                moves.push(m);
            }
        }
    }
    moves
}

fn substitute(m: &[Word; 2], w: &Word) -> Word {
    w.letters().iter().fold(Word::identity(), |acc, l| {
        let img = &m[l.gen()];
        acc.mul(&if l.is_inverse() { img.inverse() } else { img.clone() })
    })
}

/// Primitive classes of ⟨a, b⟩ up to length `max_len`: the orbit of `a`
/// under Whitehead moves, never leaving the length bound. Peak reduction
/// makes this complete.
pub fn whitehead_primitives(max_len: usize) -> BTreeSet<Word> {
    let moves = whitehead_moves();
    let start = free_class(&Word::generator(0));
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(w) = queue.pop_front() {
        for m in &moves {
            let v = free_class(&substitute(m, &w));
            if v.len() <= max_len && seen.insert(v.clone()) {
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Deterministic generator for randomized tests.
pub fn rng(seed: u64) -> rand::rngs::StdRng {
    use rand::SeedableRng;
    rand::rngs::StdRng::seed_from_u64(seed)
}

pub fn random_word(rng: &mut impl rand::Rng, rank: usize, len: usize) -> Word {
    let ls = letters(rank);
    let v: Vec<Letter> = (0..len).map(|_| ls[rng.gen_range(0..ls.len())]).collect();
    Word::new(&v)
}
