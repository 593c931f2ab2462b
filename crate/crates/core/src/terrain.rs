//! Procedural terrain courses.
//!
//! A course is a flat start zone followed by a number of artifact instances
//! (a gap, a hurdle, or a flight of stairs) separated by flat spacing
//! segments. Difficulty scales one artifact dimension linearly over ten
//! levels; fractional and extended difficulties extrapolate the same line.
//! Generation is bit-deterministic for a fixed spec.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

/// Number of samples in the forward ground scan.
pub const SCAN_LEN: usize = 24;
/// Nearest and farthest scan range (m); values clamp into this band before
/// being mapped to [0, 1].
pub const SCAN_NEAR: f64 = 0.25;
pub const SCAN_FAR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerrainKind {
    Flat,
    Gaps,
    Hurdles,
    Stairs,
}

impl TerrainKind {
    pub const ALL: [TerrainKind; 4] =
        [TerrainKind::Flat, TerrainKind::Gaps, TerrainKind::Hurdles, TerrainKind::Stairs];
}

impl fmt::Display for TerrainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TerrainKind::Flat => "flat",
            TerrainKind::Gaps => "gaps",
            TerrainKind::Hurdles => "hurdles",
            TerrainKind::Stairs => "stairs",
        };
        write!(f, "{s}")
    }
}

impl FromStr for TerrainKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(TerrainKind::Flat),
            "gaps" | "gap" => Ok(TerrainKind::Gaps),
            "hurdles" | "hurdle" => Ok(TerrainKind::Hurdles),
            "stairs" | "stair" => Ok(TerrainKind::Stairs),
            other => Err(Error::Config(format!("unknown terrain kind '{other}'"))),
        }
    }
}

/// What to build: kind, difficulty in [1, 12], instance count, seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainSpec {
    pub kind: TerrainKind,
    pub difficulty: f64,
    pub instance_count: usize,
    pub seed: u64,
}

/// Geometry knobs the difficulty schedule does not touch.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainParams {
    /// Flat, gap-free run-up before the first artifact (m).
    pub start_zone: f64,
    /// Flat spacing between artifacts, also the tail after the last one (m).
    pub spacing: f64,
    /// Uniform jitter applied to each spacing (m).
    pub spacing_jitter: f64,
    /// Hurdle thickness along x (m).
    pub hurdle_width: f64,
    /// Stair tread depth (m).
    pub stair_run: f64,
    /// How far below grade a gap floor sits (m).
    pub gap_depth: f64,
    /// Length budgeted per instance on flat courses (m).
    pub flat_instance_len: f64,
}

impl Default for TerrainParams {
    fn default() -> Self {
        TerrainParams {
            start_zone: 3.0,
            spacing: 1.5,
            spacing_jitter: 0.25,
            hurdle_width: 0.06,
            stair_run: 0.28,
            gap_depth: 2.0,
            flat_instance_len: 1.5,
        }
    }
}

/// One horizontal stretch of ground. `[x_start, x_end)`; the final segment
/// also owns its right endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x_start: f64,
    pub x_end: f64,
    pub height: f64,
    pub is_gap: bool,
}

/// Piecewise-constant ground profile with gap intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Heightfield {
    pub segments: Vec<Segment>,
    pub total_length: f64,
    pub start_zone: f64,
    pub finish_x: f64,
    /// Depth of gap floors below local grade (m).
    pub gap_depth: f64,
}

impl Heightfield {
    /// Single flat segment at height 0, handy for tests.
    pub fn flat(length: f64) -> Self {
        Heightfield {
            segments: vec![Segment { x_start: 0.0, x_end: length, height: 0.0, is_gap: false }],
            total_length: length,
            start_zone: length,
            finish_x: length,
            gap_depth: TerrainParams::default().gap_depth,
        }
    }

    /// Ground height and gap flag at `x`; queries outside the course clamp to
    /// the nearest segment. Gap intervals report the gap floor.
    pub fn height_at(&self, x: f64) -> (f64, bool) {
        let seg = self.segment_at(x);
        if seg.is_gap {
            (seg.height - self.gap_depth, true)
        } else {
            (seg.height, false)
        }
    }

    fn segment_at(&self, x: f64) -> &Segment {
        let segs = &self.segments;
        if x < segs[0].x_start {
            return &segs[0];
        }
        if x >= segs[segs.len() - 1].x_end {
            return &segs[segs.len() - 1];
        }
        // boundary points belong to the right (downstream) segment
        let mut lo = 0usize;
        let mut hi = segs.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if x >= segs[mid].x_end {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        &segs[lo]
    }

    /// Forward clearance scan: `SCAN_LEN` samples of base height over ground
    /// at offsets evenly spaced across `[SCAN_NEAR, SCAN_FAR]` ahead of the
    /// base, each clamped to that band and mapped affinely to [0, 1].
    pub fn scan(&self, base_x: f64, base_z: f64) -> [f64; SCAN_LEN] {
        let mut out = [0.0; SCAN_LEN];
        for (i, slot) in out.iter_mut().enumerate() {
            let offset = SCAN_NEAR + (SCAN_FAR - SCAN_NEAR) * i as f64 / (SCAN_LEN - 1) as f64;
            let (h, _) = self.height_at(base_x + offset);
            let clearance = (base_z - h).clamp(SCAN_NEAR, SCAN_FAR);
            *slot = (clearance - SCAN_NEAR) / (SCAN_FAR - SCAN_NEAR);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidInput("heightfield has no segments".into()));
        }
        let mut x = self.segments[0].x_start;
        for s in &self.segments {
            if (s.x_start - x).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("segment gap/overlap at x={x}")));
            }
            if s.x_end - s.x_start <= 1e-12 {
                return Err(Error::InvalidInput(format!("zero-length segment at x={x}")));
            }
            x = s.x_end;
        }
        if (x - self.total_length).abs() > 1e-9 || (self.finish_x - self.total_length).abs() > 1e-9 {
            return Err(Error::InvalidInput("total length mismatch".into()));
        }
        let first = &self.segments[0];
        if first.is_gap || first.height != 0.0 || first.x_end < self.start_zone - 1e-9 {
            return Err(Error::InvalidInput("start zone must be flat and gap-free".into()));
        }
        Ok(())
    }
}

/// The artifact dimension (m) at `difficulty`: a linear ramp through the
/// level-1 and level-10 endpoints, extrapolated beyond level 10.
pub fn dimension_for(kind: TerrainKind, difficulty: f64) -> Result<f64> {
    if !(1.0..=12.0).contains(&difficulty) {
        return Err(Error::InvalidInput(format!(
            "difficulty {difficulty} outside [1, 12]"
        )));
    }
    let (p1, p10) = match kind {
        TerrainKind::Flat => (0.0, 0.0),
        TerrainKind::Gaps => (0.10, 1.00),
        TerrainKind::Hurdles => (0.13, 0.38),
        TerrainKind::Stairs => (0.017, 0.17),
    };
    // convex form hits both published endpoints exactly
    let s = (difficulty - 1.0) / 9.0;
    Ok(p1 * (1.0 - s) + p10 * s)
}

/// Builds the course for `spec`. Identical specs yield identical segment
/// lists bit-for-bit.
pub fn generate(spec: &TerrainSpec, params: &TerrainParams) -> Result<Heightfield> {
    if spec.instance_count == 0 {
        return Err(Error::InvalidInput("instance_count must be at least 1".into()));
    }
    let dim = dimension_for(spec.kind, spec.difficulty)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    if spec.kind == TerrainKind::Flat {
        let total = params.start_zone + spec.instance_count as f64 * params.flat_instance_len;
        let hf = Heightfield {
            segments: vec![Segment { x_start: 0.0, x_end: total, height: 0.0, is_gap: false }],
            total_length: total,
            start_zone: params.start_zone,
            finish_x: total,
            gap_depth: params.gap_depth,
        };
        hf.validate()?;
        return Ok(hf);
    }

    let mut segments = Vec::new();
    let mut x = 0.0;
    let mut grade = 0.0; // accumulated ground height (stairs climb)
    let push = |segments: &mut Vec<Segment>, x: &mut f64, len: f64, h: f64, gap: bool| {
        segments.push(Segment { x_start: *x, x_end: *x + len, height: h, is_gap: gap });
        *x += len;
    };
    push(&mut segments, &mut x, params.start_zone, 0.0, false);

    for _ in 0..spec.instance_count {
        match spec.kind {
            TerrainKind::Gaps => push(&mut segments, &mut x, dim, grade, true),
            TerrainKind::Hurdles => push(&mut segments, &mut x, params.hurdle_width, grade + dim, false),
            TerrainKind::Stairs => {
                let n_risers = rng.random_range(5..=8);
                for _ in 0..n_risers {
                    grade += dim;
                    push(&mut segments, &mut x, params.stair_run, grade, false);
                }
            }
            TerrainKind::Flat => unreachable!(),
        }
        let jitter = rng.random_range(-params.spacing_jitter..=params.spacing_jitter);
        push(&mut segments, &mut x, params.spacing + jitter, grade, false);
    }

    let hf = Heightfield {
        segments,
        total_length: x,
        start_zone: params.start_zone,
        finish_x: x,
        gap_depth: params.gap_depth,
    };
    hf.validate()?;
    Ok(hf)
}
