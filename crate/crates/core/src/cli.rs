//! Command-line surface: text formats, config, writers and dispatch.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use crate::charlab::{self, CellStatus, RepFamily, Representation, ScanGrid, ScanRow};
use crate::error::{Error, Result};
use crate::hyp::Isometry;
use crate::primitives::{self, PrimitiveClass, ReferenceStructure};
use crate::pscert::{self, CertResult, OrbitMap, PlaneCriterionParams};
use crate::settings::{self, NumericSettings};
use crate::words::{self, Automorphism, Presentation, Word};

// ---------------------------------------------------------------- formats

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Parses the line-oriented presentation format:
///
/// ```text
/// gens a b c
/// relator a a b b c c
/// auto twist_ab: a -> a a b ; b -> B A b
/// inverse twist_ab: a -> a B A ; b -> a b b
/// ```
///
/// Letters are separated by spaces; `B` or `b^-1` is the inverse of `b`.
/// Generators not listed in an `auto`/`inverse` line are fixed.
pub fn parse_presentation(text: &str) -> Result<(Presentation, Vec<Automorphism>)> {
    let mut names: Option<Vec<String>> = None;
    let mut relator_lines: Vec<(usize, String)> = Vec::new();
    let mut autos: Vec<(usize, String, String)> = Vec::new();
    let mut inverses: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let err = |msg: &str| Error::Parse { line: line_no, msg: msg.into() };
        match head {
            "gens" => {
                if names.is_some() {
                    return Err(err("duplicate gens line"));
                }
                let n: Vec<String> = rest.split_whitespace().map(String::from).collect();
                if n.is_empty() || n.iter().any(|s| s.chars().any(|c| c.is_uppercase()) || s.contains('^')) {
                    return Err(err("generator names must be non-empty lowercase tokens"));
                }
                names = Some(n);
            }
            "relator" => relator_lines.push((line_no, rest.to_string())),
            "auto" | "inverse" => {
                let (name, body) = rest.split_once(':').ok_or_else(|| err("expected '<name>: <images>'"))?;
                let name = name.trim().to_string();
                if head == "auto" {
                    autos.push((line_no, name, body.to_string()));
                } else {
                    inverses.insert(name, (line_no, body.to_string()));
                }
            }
            other => return Err(err(&format!("unknown directive '{other}'"))),
        }
    }
    let names = names.ok_or(Error::Parse { line: 0, msg: "missing gens line".into() })?;
    let scratch = Presentation::free(names.len());
    let scratch = Presentation { names: names.clone(), ..scratch };
    let word = |line: usize, s: &str| scratch.parse_word(s).map_err(|e| Error::Parse { line, msg: e.to_string() });
    let mut relators = Vec::new();
    for (line, r) in &relator_lines {
        relators.push(word(*line, r)?);
    }
    let pres = Presentation::from_parts(names.clone(), relators)?;
    let images = |line: usize, body: &str| -> Result<Vec<Word>> {
        let mut imgs: Vec<Word> = pres.generators();
        for part in body.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (g, img) = part.split_once("->").ok_or(Error::Parse { line, msg: "expected 'x -> word'".into() })?;
            let gi = names
                .iter()
                .position(|n| n == g.trim())
                .ok_or(Error::Parse { line, msg: format!("unknown generator '{}'", g.trim()) })?;
            imgs[gi] = word(line, img)?;
        }
        Ok(imgs)
    };
    let mut out = Vec::new();
    for (line, name, body) in autos {
        let (iline, ibody) = inverses
            .remove(&name)
            .ok_or(Error::Parse { line, msg: format!("automorphism '{name}' has no inverse line") })?;
        out.push(Automorphism { name, images: images(line, &body)?, inverse_images: images(iline, &ibody)? });
    }
    if let Some((name, (line, _))) = inverses.into_iter().next() {
        return Err(Error::Parse { line, msg: format!("inverse for unknown automorphism '{name}'") });
    }
    Ok((pres, out))
}

pub fn format_presentation(p: &Presentation, autos: &[Automorphism]) -> String {
    let spaced = |w: &Word| {
        if w.is_empty() {
            return "1".to_string();
        }
        w.letters()
            .iter()
            .map(|l| {
                let n = &p.names[l.gen()];
                if l.is_inverse() {
                    format!("{n}^-1")
                } else {
                    n.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = format!("gens {}\n", p.names.join(" "));
    for r in &p.relators {
        s += &format!("relator {}\n", spaced(r));
    }
    let body = |imgs: &[Word]| {
        imgs.iter().enumerate().map(|(i, w)| format!("{} -> {}", p.names[i], spaced(w))).collect::<Vec<_>>().join(" ; ")
    };
    for f in autos {
        s += &format!("auto {}: {}\n", f.name, body(&f.images));
        s += &format!("inverse {}: {}\n", f.name, body(&f.inverse_images));
    }
    s
}

/// Floats are written with 17 significant digits, which round-trips f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "none".into())
}

pub fn format_representation(rho: &Representation) -> String {
    let mut s = format!("presentation {}\n", rho.presentation.name());
    for (name, m) in rho.presentation.names.iter().zip(&rho.gens) {
        let e: Vec<String> = [m.a, m.b, m.c, m.d].iter().flat_map(|z| [fmt_f64(z.re), fmt_f64(z.im)]).collect();
        s += &format!("gen {} {}\n", name, e.join(" "));
    }
    s
}

pub fn parse_representation(text: &str) -> Result<Representation> {
    let mut pres: Option<Presentation> = None;
    let mut gens: Vec<Option<Isometry>> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: k + 1, msg };
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "presentation" if toks.len() == 2 => {
                let p = Presentation::by_name(toks[1]).map_err(|e| err(e.to_string()))?;
                gens = vec![None; p.rank()];
                pres = Some(p);
            }
            "gen" if toks.len() == 10 => {
                let p = pres.as_ref().ok_or_else(|| err("gen before presentation".into()))?;
                let gi = p.names.iter().position(|n| n == toks[1]).ok_or_else(|| err(format!("unknown generator '{}'", toks[1])))?;
                let v: Vec<f64> = toks[2..]
                    .iter()
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number '{t}'"))))
                    .collect::<Result<_>>()?;
                let z = |i: usize| C64::new(v[2 * i], v[2 * i + 1]);
                gens[gi] = Some(Isometry::new(z(0), z(1), z(2), z(3)).map_err(|e| err(e.to_string()))?);
            }
            _ => return Err(err(format!("unrecognized line '{line}'"))),
        }
    }
    let p = pres.ok_or(Error::Parse { line: 0, msg: "missing presentation line".into() })?;
    let gens: Vec<Isometry> = gens
        .into_iter()
        .enumerate()
        .map(|(i, g)| g.ok_or(Error::Parse { line: 0, msg: format!("missing generator '{}'", p.names[i]) }))
        .collect::<Result<_>>()?;
    Representation::new(&p, gens, "file")
}

// ---------------------------------------------------------------- writers

/// CSV with a header row, minimal RFC-4180 quoting and `\n` line endings.
pub fn write_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub const SCAN_HEADER: [&str; 12] =
    ["cell_i", "cell_j", "p_re", "p_im", "residual", "verdict", "min_gap", "stride", "witness", "n_parabolic", "r_emp", "R_emp"];

pub fn scan_csv(rows: &[ScanRow]) -> Result<Vec<u8>> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.cell_i.to_string(),
                r.cell_j.to_string(),
                fmt_f64(r.p.re),
                fmt_f64(r.p.im),
                fmt_opt(r.residual),
                r.status.label().to_string(),
                fmt_opt(r.min_gap),
                r.stride.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
                if r.witness.is_empty() { "none".into() } else { r.witness.clone() },
                r.n_parabolic.to_string(),
                fmt_opt(r.r_emp),
                fmt_opt(r.r_max),
            ]
        })
        .collect();
    write_csv(&SCAN_HEADER, &body)
}

pub const CERT_HEADER: [&str; 5] = ["word", "length", "stride", "min_gap", "verdict"];

/// One row per class plus a `summary` row carrying the global verdict.
pub fn cert_csv(p: &Presentation, res: &CertResult) -> Result<Vec<u8>> {
    let mut rows: Vec<Vec<String>> = res
        .words
        .iter()
        .map(|w| {
            vec![
                p.format_word(&w.word),
                w.length.to_string(),
                w.stride.to_string(),
                fmt_opt(w.min_gap.is_finite().then_some(w.min_gap)),
                w.verdict.to_string(),
            ]
        })
        .collect();
    rows.push(vec![
        "summary".into(),
        res.max_len.to_string(),
        res.stride.to_string(),
        fmt_opt(res.min_gap.filter(|g| g.is_finite())),
        res.verdict.to_string(),
    ]);
    write_csv(&CERT_HEADER, &rows)
}

pub fn primitives_csv(p: &Presentation, prims: &[PrimitiveClass]) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = prims
        .iter()
        .map(|c| {
            vec![
                p.format_word(&c.word),
                c.length.to_string(),
                c.orientation.to_string(),
                c.verified_depth.map(|d| d.to_string()).unwrap_or_else(|| "exact".into()),
            ]
        })
        .collect();
    write_csv(&["canonical_word", "length", "orientation", "verdict_depth"], &rows)
}

/// Fixed palette: Certified, Inconclusive, Failed, BuildError.
pub fn palette(s: CellStatus) -> [u8; 3] {
    match s {
        CellStatus::Certified => [46, 139, 87],
        CellStatus::Inconclusive => [230, 180, 30],
        CellStatus::Failed => [200, 40, 40],
        CellStatus::BuildError => [60, 60, 60],
    }
}

/// Plain P3 image, one pixel per cell, rows given top to bottom.
pub fn write_ppm(raster: &[Vec<CellStatus>]) -> Result<Vec<u8>> {
    let h = raster.len();
    let w = raster.first().map_or(0, |r| r.len());
    if w == 0 || h == 0 || w > 4096 || h > 4096 || raster.iter().any(|r| r.len() != w) {
        return Err(Error::Invalid(format!("raster must be rectangular with sides in 1..=4096, got {w}x{h}")));
    }
    let mut s = format!("P3\n{w} {h}\n255\n");
    for row in raster {
        let px: Vec<String> = row.iter().map(|c| palette(*c)).map(|[r, g, b]| format!("{r} {g} {b}")).collect();
        s += &px.join(" ");
        s.push('\n');
    }
    Ok(s.into_bytes())
}

pub fn parse_ppm(bytes: &[u8]) -> Result<Vec<Vec<CellStatus>>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))?;
    let toks: Vec<&str> = text.split_whitespace().collect();
    let bad = || Error::Invalid("malformed P3 image".into());
    if toks.len() < 4 || toks[0] != "P3" || toks[3] != "255" {
        return Err(bad());
    }
    let w: usize = toks[1].parse().map_err(|_| bad())?;
    let h: usize = toks[2].parse().map_err(|_| bad())?;
    let vals: Vec<u8> = toks[4..].iter().map(|t| t.parse::<u8>().map_err(|_| bad())).collect::<Result<_>>()?;
    if vals.len() != 3 * w * h {
        return Err(bad());
    }
    let all = [CellStatus::Certified, CellStatus::Inconclusive, CellStatus::Failed, CellStatus::BuildError];
    let pixel = |k: usize| all.into_iter().find(|c| palette(*c) == [vals[3 * k], vals[3 * k + 1], vals[3 * k + 2]]).ok_or_else(bad);
    (0..h).map(|j| (0..w).map(|i| pixel(j * w + i)).collect()).collect()
}

/// Raster of a scan with Im increasing upwards (first row = largest Im).
pub fn scan_raster(grid: &ScanGrid, rows: &[ScanRow]) -> Vec<Vec<CellStatus>> {
    let mut r = vec![vec![CellStatus::BuildError; grid.nx]; grid.ny];
    for row in rows {
        r[grid.ny - 1 - row.cell_j][row.cell_i] = row.status;
    }
    r
}

// ---------------------------------------------------------------- config

/// Run configuration; every default comes from [`crate::settings`].
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub ball_radius: usize,
    pub max_word_len: usize,
    pub conjugator_depth: usize,
    pub class_tol: f64,
    pub cert_gap: f64,
    pub fingerprint_tol: f64,
    pub parabolic_tol: f64,
    pub residual_bound: f64,
    /// `None` means auto-tune over strides 1..=4.
    pub stride: Option<usize>,
    pub window: usize,
    pub family: String,
    pub t1: f64,
    pub t2: f64,
    pub tr_a: f64,
    pub tr_b: f64,
    pub grid_re_min: f64,
    pub grid_re_max: f64,
    pub grid_im_min: f64,
    pub grid_im_max: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub csv_out: Option<PathBuf>,
    pub ppm_out: Option<PathBuf>,
    pub threads: usize,
    pub orbit_depth: usize,
    pub window_bound: f64,
}

impl Default for Config {
    fn default() -> Self {
        let t = charlab::anchor_glide_length();
        Self {
            ball_radius: settings::BALL_RADIUS,
            max_word_len: settings::SCAN_MAX_LEN,
            conjugator_depth: settings::CONJUGATOR_DEPTH,
            class_tol: settings::CLASS_TOL,
            cert_gap: settings::CERT_GAP,
            fingerprint_tol: settings::FINGERPRINT_TOL,
            parabolic_tol: settings::PARABOLIC_TOL,
            residual_bound: settings::RESIDUAL_BOUND,
            stride: None,
            window: settings::WINDOW,
            family: "nec3".into(),
            t1: t,
            t2: t,
            tr_a: 3.0,
            tr_b: 3.0,
            grid_re_min: 0.2,
            grid_re_max: 0.5,
            grid_im_min: -0.15,
            grid_im_max: 0.15,
            grid_nx: 32,
            grid_ny: 32,
            csv_out: None,
            ppm_out: None,
            threads: 0,
            orbit_depth: 4,
            window_bound: 1e4,
        }
    }
}

/// Keys accepted in config files, with a one-line description each.
pub const CONFIG_SCHEMA: [(&str, &str); 26] = [
    ("ball_radius", "Cayley ball radius cap (integer, <= 16)"),
    ("max_word_len", "primitive word-length cap (integer)"),
    ("conjugator_depth", "conjugator depth of the simplicity test (integer)"),
    ("class_tol", "classification tolerance on tr^2 (real)"),
    ("cert_gap", "plane criterion gap c (real > 0)"),
    ("fingerprint_tol", "character identification tolerance (real)"),
    ("parabolic_tol", "parabolic suspect tolerance on |tr^2 - 4| (real)"),
    ("residual_bound", "largest accepted relator residual (real)"),
    ("stride", "plane criterion stride: auto or integer >= 1"),
    ("window", "quasi-axis periods on each side (integer)"),
    ("family", "nec3 or f2"),
    ("t1", "nec3: first glide length (real > 0)"),
    ("t2", "nec3: second glide length (real > 0)"),
    ("tr_a", "f2: trace of a (real)"),
    ("tr_b", "f2: trace of b (real)"),
    ("grid_re_min", "scan window, real part minimum"),
    ("grid_re_max", "scan window, real part maximum"),
    ("grid_im_min", "scan window, imaginary part minimum"),
    ("grid_im_max", "scan window, imaginary part maximum"),
    ("grid_nx", "scan cells along the real axis"),
    ("grid_ny", "scan cells along the imaginary axis"),
    ("csv_out", "scan CSV path (default stdout)"),
    ("ppm_out", "scan PPM path (optional)"),
    ("threads", "worker threads, 0 = all cores"),
    ("orbit_depth", "automorphism word depth for orbit sampling (<= 8)"),
    ("window_bound", "sup-norm bound of the fingerprint window for orbit sampling"),
];

pub fn schema_text() -> String {
    CONFIG_SCHEMA.iter().map(|(k, d)| format!("  {k:<18} {d}\n")).collect()
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        for (k, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse { line: k + 1, msg: "expected key=value".into() })?;
            c.set(key.trim(), value.trim()).map_err(|e| Error::Parse { line: k + 1, msg: e.to_string() })?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Invalid(format!("bad value '{value}' for {key}"));
        let real = || value.parse::<f64>().map_err(|_| bad());
        let int = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "ball_radius" => self.ball_radius = int()?,
            "max_word_len" => self.max_word_len = int()?,
            "conjugator_depth" => self.conjugator_depth = int()?,
            "class_tol" => self.class_tol = real()?,
            "cert_gap" => self.cert_gap = real()?,
            "fingerprint_tol" => self.fingerprint_tol = real()?,
            "parabolic_tol" => self.parabolic_tol = real()?,
            "residual_bound" => self.residual_bound = real()?,
            "stride" => self.stride = if value == "auto" { None } else { Some(int()?.max(1)) },
            "window" => self.window = int()?,
            "family" => {
                if value != "nec3" && value != "f2" {
                    return Err(bad());
                }
                self.family = value.into()
            }
            "t1" => self.t1 = real()?,
            "t2" => self.t2 = real()?,
            "tr_a" => self.tr_a = real()?,
            "tr_b" => self.tr_b = real()?,
            "grid_re_min" => self.grid_re_min = real()?,
            "grid_re_max" => self.grid_re_max = real()?,
            "grid_im_min" => self.grid_im_min = real()?,
            "grid_im_max" => self.grid_im_max = real()?,
            "grid_nx" => self.grid_nx = int()?,
            "grid_ny" => self.grid_ny = int()?,
            "csv_out" => self.csv_out = Some(value.into()),
            "ppm_out" => self.ppm_out = Some(value.into()),
            "threads" => self.threads = int()?,
            "orbit_depth" => self.orbit_depth = int()?,
            "window_bound" => self.window_bound = real()?,
            _ => return Err(Error::Invalid(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn numeric(&self) -> NumericSettings {
        NumericSettings {
            class_tol: self.class_tol,
            cert_gap: self.cert_gap,
            fingerprint_tol: self.fingerprint_tol,
            parabolic_tol: self.parabolic_tol,
            residual_bound: self.residual_bound,
            ..NumericSettings::default()
        }
    }

    pub fn family(&self) -> RepFamily {
        if self.family == "f2" {
            RepFamily::TraceTripleF2 { tr_a: C64::new(self.tr_a, 0.0), tr_b: C64::new(self.tr_b, 0.0) }
        } else {
            RepFamily::NecGenus3 { t1: self.t1, t2: self.t2 }
        }
    }

    pub fn grid(&self) -> ScanGrid {
        ScanGrid {
            re_min: self.grid_re_min,
            re_max: self.grid_re_max,
            im_min: self.grid_im_min,
            im_max: self.grid_im_max,
            nx: self.grid_nx,
            ny: self.grid_ny,
        }
    }

    pub fn plane_params(&self) -> PlaneCriterionParams {
        PlaneCriterionParams { stride: self.stride.unwrap_or(1), gap: self.cert_gap, window: self.window }
    }
}

// ---------------------------------------------------------------- pipelines

/// Primitive classes of the presentation up to `max_len` with the built-in reference.
pub fn primitives_for(p: &Presentation, cfg: &Config, max_len: usize) -> Result<Vec<PrimitiveClass>> {
    let ball = words::build_ball(p, cfg.ball_radius.min(settings::BALL_RADIUS).max(words::TABLE_RADIUS + 1))?;
    let reference = if p.is_free() { None } else { Some(ReferenceStructure::for_presentation(p, cfg.conjugator_depth)?) };
    primitives::enumerate_primitives(&ball, reference.as_ref(), max_len)
}

pub fn certify_rep(rho: Representation, cfg: &Config, max_len: usize) -> Result<CertResult> {
    let prims = primitives_for(&rho.presentation, cfg, max_len)?;
    let om = OrbitMap::with_bound(rho, crate::hyp::H3Point::origin(), cfg.residual_bound)?;
    Ok(pscert::certify(&om, &prims, &cfg.plane_params(), cfg.stride.is_none(), &cfg.numeric()))
}

/// Scan CSV and raster for the configured window.
pub fn run_scan(cfg: &Config) -> Result<(Vec<ScanRow>, Vec<u8>, Vec<u8>)> {
    let fam = cfg.family();
    let prims = primitives_for(&fam.presentation(), cfg, cfg.max_word_len)?;
    let grid = cfg.grid();
    let rows = with_threads(cfg.threads, || {
        charlab::scan(&fam, &grid, &prims, &cfg.plane_params(), &cfg.numeric())
    })??;
    let csv = scan_csv(&rows)?;
    let ppm = write_ppm(&scan_raster(&grid, &rows))?;
    Ok((rows, csv, ppm))
}

pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(pool.install(f))
}

// ---------------------------------------------------------------- dispatch

#[derive(Parser, Debug)]
#[command(name = "pstab", about = "Primitive-stability certification for PSL(2,C) representations")]
struct Cli {
    /// key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// worker threads (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct RepSource {
    /// representation file
    #[arg(long, conflicts_with = "param")]
    rep: Option<PathBuf>,
    /// family parameter `re[,im]` (default: the family anchor)
    #[arg(long, allow_hyphen_values = true)]
    param: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Certify one representation; CSV on stdout
    Certify {
        #[command(flatten)]
        src: RepSource,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Certify every cell of a parameter window
    Scan {
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        ppm: Option<PathBuf>,
    },
    /// List primitive classes as CSV
    Primitives {
        /// built-in presentation name (free2, nonorientable3, ...)
        #[arg(long, default_value = "nonorientable3")]
        presentation: String,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Sample the orbit of a character under the shipped automorphisms
    Orbit {
        #[command(flatten)]
        src: RepSource,
        #[arg(long)]
        depth: Option<usize>,
        /// presentation file with automorphisms (default: shipped list)
        #[arg(long)]
        autos: Option<PathBuf>,
    },
    /// List primitive classes with parabolic images
    Parabolics {
        #[command(flatten)]
        src: RepSource,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Run the built-in invariant checks
    Selftest,
}

fn parse_param(s: &str) -> Result<C64> {
    let bad = || Error::Invalid(format!("bad parameter '{s}', expected re[,im]"));
    let mut it = s.split(',');
    let re = it.next().ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad())?;
    let im = match it.next() {
        Some(t) => t.trim().parse::<f64>().map_err(|_| bad())?,
        None => 0.0,
    };
    if it.next().is_some() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

fn load_rep(src: &RepSource, cfg: &Config) -> Result<Representation> {
    if let Some(path) = &src.rep {
        return parse_representation(&read(path)?);
    }
    let fam = cfg.family();
    let p = match &src.param {
        Some(s) => parse_param(s)?,
        None => fam.anchor_parameter(),
    };
    charlab::build_representation(&fam, p)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(Error::from),
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Degenerate(_) => "degenerate",
        Error::NoAxis(_) => "no_axis",
        Error::PlanesNotDisjoint => "planes_not_disjoint",
        Error::RadiusCapExceeded { .. } => "radius_cap_exceeded",
        Error::OutsideBall { .. } => "outside_ball",
        Error::BallInconsistent(_) => "ball_inconsistent",
        Error::IdentityHasNoAxis => "identity_has_no_axis",
        Error::BudgetExceeded(_) => "budget_exceeded",
        Error::OracleUnusable(_) => "oracle_unusable",
        Error::Unsupported(_) => "unsupported",
        Error::SquareRootUndefined => "square_root_undefined",
        Error::HNotLoxodromic => "h_not_loxodromic",
        Error::NoBracket => "no_bracket",
        Error::Parse { .. } => "parse",
        Error::Invalid(_) => "invalid",
        Error::Io(_) => "io",
    }
}

/// Runs the command line; returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            if code == 2 {
                eprintln!("config keys:\n{}", schema_text());
            }
            return code;
        }
    };
    let mut cfg = match &cli.config {
        Some(path) => match read(path).and_then(|t| Config::parse(&t)) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {}: {e}", error_kind(&e));
                eprintln!("config keys:\n{}", schema_text());
                return 2;
            }
        },
        None => Config::default(),
    };
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    match run(cli.cmd, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {}", error_kind(&e), e.to_string().replace('\n', " "));
            1
        }
    }
}

fn run(cmd: Cmd, cfg: &Config) -> Result<i32> {
    match cmd {
        Cmd::Certify { src, max_len } => {
            let rho = load_rep(&src, cfg)?;
            let p = rho.presentation.clone();
            let max_len = max_len.unwrap_or(settings::CERT_MAX_LEN.min(cfg.max_word_len.max(1)));
            let res = with_threads(cfg.threads, || certify_rep(rho, cfg, max_len))??;
            write_out(None, &cert_csv(&p, &res)?)?;
            Ok(0)
        }
        Cmd::Scan { csv, ppm } => {
            let (_, csv_bytes, ppm_bytes) = run_scan(cfg)?;
            write_out(csv.as_deref().or(cfg.csv_out.as_deref()), &csv_bytes)?;
            if let Some(path) = ppm.as_deref().or(cfg.ppm_out.as_deref()) {
                write_out(Some(path), &ppm_bytes)?;
            }
            Ok(0)
        }
        Cmd::Primitives { presentation, max_len } => {
            let p = match Presentation::by_name(&presentation) {
                Ok(p) => p,
                Err(_) if Path::new(&presentation).is_file() => parse_presentation(&read(Path::new(&presentation))?)?.0,
                Err(e) => return Err(e),
            };
            let prims = with_threads(cfg.threads, || primitives_for(&p, cfg, max_len.unwrap_or(cfg.max_word_len)))??;
            write_out(None, &primitives_csv(&p, &prims)?)?;
            Ok(0)
        }
        Cmd::Orbit { src, depth, autos } => {
            let rho = load_rep(&src, cfg)?;
            let gens = match autos {
                Some(path) => parse_presentation(&read(&path)?)?.1,
                None => words::shipped_automorphisms(&rho.presentation),
            };
            let report = charlab::orbit_sample(&rho, &gens, depth.unwrap_or(cfg.orbit_depth), cfg.window_bound, &cfg.numeric())?;
            let rows: Vec<Vec<String>> = (0..=report.depth)
                .map(|d| vec![d.to_string(), report.distinct_by_depth[d].to_string(), report.in_window_by_depth[d].to_string()])
                .collect();
            write_out(None, &write_csv(&["depth", "distinct", "in_window"], &rows)?)?;
            Ok(0)
        }
        Cmd::Parabolics { src, max_len } => {
            let rho = load_rep(&src, cfg)?;
            let p = rho.presentation.clone();
            let prims = primitives_for(&p, cfg, max_len.unwrap_or(cfg.max_word_len))?;
            let om = OrbitMap::with_bound(rho, crate::hyp::H3Point::origin(), cfg.residual_bound)?;
            let sus = pscert::detect_parabolic_primitives(&om, &prims, cfg.parabolic_tol);
            let rows: Vec<Vec<String>> = sus
                .iter()
                .map(|s| vec![p.format_word(&s.word), s.orientation.to_string(), fmt_f64(s.trace_sq.re), fmt_f64(s.trace_sq.im)])
                .collect();
            write_out(None, &write_csv(&["word", "orientation", "tr2_re", "tr2_im"], &rows)?)?;
            Ok(0)
        }
        Cmd::Selftest => {
            let mut failed = 0;
            for (name, ok) in selftest() {
                println!("{} {name}", if ok { "ok  " } else { "FAIL" });
                failed += usize::from(!ok);
            }
            Ok(i32::from(failed > 0))
        }
    }
}

/// Quick invariant suite behind the `selftest` subcommand.
pub fn selftest() -> Vec<(&'static str, bool)> {
    use crate::hyp::{h3_distance, perpendicular_bisector, plane_distance, H3Point};
    let mut out = Vec::new();
    let p0 = H3Point::origin();
    let pe = H3Point::new(0.0, 0.0, std::f64::consts::E).unwrap();
    out.push(("vertical geodesic distance", (h3_distance(&p0, &pe) - 1.0).abs() < 1e-12));
    let gap = perpendicular_bisector(&p0, &pe)
        .and_then(|a| perpendicular_bisector(&pe, &H3Point::new(0.0, 0.0, std::f64::consts::E.powi(2))?).map(|b| plane_distance(&a, &b)));
    out.push(("concentric bisector gap", gap.map_or(false, |g| (g - 1.0).abs() < 1e-12)));
    let free_ok = words::build_ball(&Presentation::free(2), 4).map_or(false, |b| b.size() == Some(161));
    out.push(("free ball counts", free_ok));
    let n3 = Presentation::nonorientable(3);
    let ball_ok = words::build_ball(&n3, 4).map_or(false, |b| b.table.and_then(|t| t.check).map_or(false, |c| c.inconsistencies == 0));
    out.push(("surface rewriting vs oracle", ball_ok));
    let rho = charlab::anchor(&RepFamily::nec_anchor());
    out.push(("anchor relator residual", rho.residual < 1e-9));
    let cfg = Config::default();
    let cert = certify_rep(rho.clone(), &cfg, 6).map_or(false, |r| r.verdict == pscert::Verdict::Certified);
    out.push(("anchor certification", cert));
    let g = Isometry::new(C64::new(1.0, 0.5), C64::new(0.3, 0.0), C64::new(-0.2, 0.1), C64::new(0.9, 0.0)).unwrap();
    out.push(("fingerprint conjugation invariance", charlab::conjugacy_distance(&rho, &rho.conjugated(&g)) < 1e-9));
    out.push(("config defaults", Config::default().numeric() == NumericSettings::default()));
    out
}
