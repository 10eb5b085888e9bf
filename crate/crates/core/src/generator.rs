//! Synthetic stream with four Gaussian communities.
//!
//! Deprived-granted (DG), favored-granted (FG), deprived-rejected (DR) and
//! favored-rejected (FR) instances are drawn from their own Gaussian. The SPP
//! parameter shrinks the DG community so that the true-label parity of a chunk
//! is close to SPP, and the surplus goes to the favored side. Drifts translate
//! all four means together along one axis.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Attribute, ClassAttribute, Group, Label, Schema, Value};
use crate::stream::{Chunk, Instance};

pub const DEFAULT_N: usize = 250;
pub const DEFAULT_CHUNKS: usize = 200;
pub const DEFAULT_DRIFTS: usize = 20;
pub const DEFAULT_DIMENSION: usize = 2;
pub const DEFAULT_MAX_SPP: f64 = 0.3;

pub const SA_NAME: &str = "sa";
pub const DEPRIVED: &str = "deprived";
pub const FAVORED: &str = "favored";
pub const CLASS_NAME: &str = "class";
pub const REJECTED: &str = "rejected";
pub const GRANTED: &str = "granted";

/// Communities in the order their Gaussians are stored.
pub const COMMUNITIES: [(Group, Label); 4] = [
    (Group::Deprived, Label::Granted),
    (Group::Favored, Label::Granted),
    (Group::Deprived, Label::Rejected),
    (Group::Favored, Label::Rejected),
];

const BASE_MEANS: [[f64; 2]; 4] = [[2.0, 2.0], [2.5, 2.5], [0.5, 0.5], [-2.0, -2.0]];
const VARIANCE: f64 = 3.0;
const COVARIANCE: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Instances per Gaussian per chunk.
    pub n: usize,
    pub chunks: usize,
    /// SPP of each chunk, in `[0, 0.5)`.
    pub spp_schedule: Vec<f64>,
    /// Chunk indices before which a drift is applied.
    pub drift_points: Vec<usize>,
    pub drift_magnitude_range: [f64; 2],
    pub seed: u64,
    pub dimension: usize,
}

/// Knobs for drawing a random schedule and drift points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOptions {
    pub n: usize,
    pub chunks: usize,
    pub drifts: usize,
    /// SPP values are drawn from `[0, max_spp)` on a 0.001 grid.
    pub max_spp: f64,
    /// Shortest and longest run of chunks sharing one SPP value.
    pub segment_length: [usize; 2],
    /// Chance that a segment has no discrimination at all.
    pub zero_segment_probability: f64,
    /// Smallest distance between two drift points.
    pub min_drift_gap: usize,
    /// Chunks kept free of drifts at the start and at the end of the stream.
    pub drift_margin: [usize; 2],
    pub dimension: usize,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions {
            n: DEFAULT_N,
            chunks: DEFAULT_CHUNKS,
            drifts: DEFAULT_DRIFTS,
            max_spp: DEFAULT_MAX_SPP,
            segment_length: [5, 20],
            zero_segment_probability: 0.2,
            min_drift_gap: 6,
            drift_margin: [6, 11],
            dimension: DEFAULT_DIMENSION,
        }
    }
}

impl GeneratorConfig {
    /// Stationary stream: one SPP everywhere, no drift.
    pub fn stationary(n: usize, chunks: usize, spp: f64, seed: u64) -> Self {
        GeneratorConfig {
            n,
            chunks,
            spp_schedule: vec![spp; chunks],
            drift_points: Vec::new(),
            drift_magnitude_range: [0.0, 2.0],
            seed,
            dimension: DEFAULT_DIMENSION,
        }
    }

    /// Random piecewise-constant SPP schedule and random drift points, both
    /// derived from `seed`.
    pub fn randomized(opts: &ScheduleOptions, seed: u64) -> Result<Self> {
        if opts.chunks == 0 {
            return Err(Error::Config("generator needs at least one chunk".into()));
        }
        if !(opts.max_spp > 0.0 && opts.max_spp <= 0.5) {
            return Err(Error::Config(format!("max SPP {} outside (0, 0.5]", opts.max_spp)));
        }
        let [lo, hi] = opts.segment_length;
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!("bad segment length range [{lo}, {hi}]")));
        }
        // Independent of the sampling stream so an explicit schedule with the
        // same seed draws the same instances.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
        let steps = (opts.max_spp * 1000.0).round() as u32;
        let mut spp_schedule = Vec::with_capacity(opts.chunks);
        while spp_schedule.len() < opts.chunks {
            let len = rng.random_range(lo..=hi);
            let spp = if rng.random_bool(opts.zero_segment_probability.clamp(0.0, 1.0)) {
                0.0
            } else {
                f64::from(rng.random_range(0..steps)) / 1000.0
            };
            let take = len.min(opts.chunks - spp_schedule.len());
            spp_schedule.extend(std::iter::repeat_n(spp, take));
        }
        let drift_points = spaced_points(
            &mut rng,
            opts.chunks,
            opts.drifts,
            opts.min_drift_gap,
            opts.drift_margin,
        )?;
        Ok(GeneratorConfig {
            n: opts.n,
            chunks: opts.chunks,
            spp_schedule,
            drift_points,
            drift_magnitude_range: [0.0, 2.0],
            seed,
            dimension: opts.dimension,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.chunks == 0 {
            return Err(Error::Config("generator needs n >= 1 and at least one chunk".into()));
        }
        if self.dimension < 2 {
            return Err(Error::Config(format!("dimension {} below 2", self.dimension)));
        }
        if self.spp_schedule.len() != self.chunks {
            return Err(Error::Config(format!(
                "SPP schedule has {} entries for {} chunks",
                self.spp_schedule.len(),
                self.chunks
            )));
        }
        for &spp in &self.spp_schedule {
            spp_to_count(spp, self.n)?;
        }
        if let Some(&p) = self.drift_points.iter().find(|&&p| p >= self.chunks) {
            return Err(Error::Config(format!("drift point {p} outside {} chunks", self.chunks)));
        }
        let [lo, hi] = self.drift_magnitude_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(Error::Config(format!("bad drift magnitude range [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Instances per chunk; independent of SPP.
    pub fn chunk_size(&self) -> usize {
        4 * self.n
    }
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig::randomized(&ScheduleOptions::default(), 1).expect("default options are valid")
    }
}

/// `count` sorted points in `[margin[0], chunks - margin[1]]`, pairwise at
/// least `gap` apart.
fn spaced_points(
    rng: &mut impl Rng,
    chunks: usize,
    count: usize,
    gap: usize,
    margin: [usize; 2],
) -> Result<Vec<usize>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let gap = gap.max(1);
    let first = margin[0].max(1);
    let last = chunks.saturating_sub(margin[1].max(1));
    // Choose from a compressed range, then spread out by (gap - 1) per rank.
    let spread = (count - 1) * (gap - 1);
    let room = (last + 1)
        .checked_sub(first + spread)
        .filter(|&r| r >= count && last >= first)
        .ok_or_else(|| {
            Error::Config(format!(
                "cannot place {count} drifts {gap} chunks apart in [{first}, {last}]"
            ))
        })?;
    let picked: BTreeSet<usize> = rand::seq::index::sample(rng, room, count).into_iter().collect();
    Ok(picked
        .into_iter()
        .enumerate()
        .map(|(rank, q)| first + q + rank * (gap - 1))
        .collect())
}

/// Size of the DG community for a given SPP.
pub fn spp_to_count(spp: f64, n: usize) -> Result<usize> {
    if !(0.0..0.5).contains(&spp) {
        return Err(Error::Config(format!("SPP {spp} outside [0, 0.5)")));
    }
    let x = n as f64 * (1.0 - 2.0 * spp) / (1.0 + 2.0 * spp);
    Ok(x.round() as usize)
}

/// Community sizes `[DG, FG, DR, FR]` for one chunk.
pub fn community_sizes(spp: f64, n: usize) -> Result<[usize; 4]> {
    let x = spp_to_count(spp, n)?;
    let surplus = n - x;
    Ok([x, n + surplus / 2, n, n + surplus.div_ceil(2)])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl Gaussian {
    /// Lower-triangular `L` with `L Lᵀ = covariance`.
    pub fn cholesky(&self) -> Result<Vec<Vec<f64>>> {
        let d = self.mean.len();
        let a = &self.covariance;
        let mut l = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                if i == j {
                    let diag = a[i][i] - s;
                    if diag <= 0.0 {
                        return Err(Error::Config("covariance is not positive definite".into()));
                    }
                    l[i][j] = diag.sqrt();
                } else {
                    l[i][j] = (a[i][j] - s) / l[j][j];
                }
            }
        }
        Ok(l)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    /// Indexed like [`COMMUNITIES`].
    pub communities: [Gaussian; 4],
}

impl GaussianState {
    pub fn initial(dimension: usize) -> Self {
        let covariance: Vec<Vec<f64>> = (0..dimension)
            .map(|i| {
                (0..dimension)
                    .map(|j| {
                        if i == j {
                            VARIANCE
                        } else if i / 2 == j / 2 {
                            COVARIANCE
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let communities = BASE_MEANS.map(|m| {
            let mut mean = vec![0.0; dimension];
            mean[..2].copy_from_slice(&m);
            Gaussian {
                mean,
                covariance: covariance.clone(),
            }
        });
        GaussianState { communities }
    }

    pub fn dimension(&self) -> usize {
        self.communities[0].mean.len()
    }

    pub fn gaussian(&self, group: Group, label: Label) -> &Gaussian {
        let i = COMMUNITIES
            .iter()
            .position(|&c| c == (group, label))
            .expect("all communities listed");
        &self.communities[i]
    }

    /// Moves every mean by `delta` along `axis`.
    pub fn translate(&mut self, axis: usize, delta: f64) {
        for g in &mut self.communities {
            g.mean[axis] += delta;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftEvent {
    pub chunk: usize,
    pub axis: usize,
    /// +1 or -1.
    pub sign: i8,
    pub magnitude: f64,
}

/// Shifts all means by one random `k` along one of the `2d` axis directions.
pub fn apply_drift(state: &mut GaussianState, range: [f64; 2], chunk: usize, rng: &mut impl Rng) -> DriftEvent {
    let direction = rng.random_range(0..2 * state.dimension());
    let (axis, sign) = (direction / 2, if direction % 2 == 0 { 1 } else { -1 });
    let magnitude = if range[1] > range[0] {
        rng.random_range(range[0]..=range[1])
    } else {
        range[0]
    };
    state.translate(axis, f64::from(sign) * magnitude);
    DriftEvent {
        chunk,
        axis,
        sign,
        magnitude,
    }
}

/// Feature schema of the generated stream: `a1..ad`, then the group column.
pub fn synthetic_schema(dimension: usize) -> Schema {
    let mut attributes: Vec<Attribute> = (1..=dimension).map(|i| Attribute::numeric(format!("a{i}"))).collect();
    attributes.push(Attribute::categorical(SA_NAME, [DEPRIVED, FAVORED]));
    Schema::new(
        attributes,
        dimension,
        DEPRIVED,
        ClassAttribute::new(CLASS_NAME, REJECTED, GRANTED),
    )
    .expect("synthetic schema is valid")
}

/// Produces chunks in order; drift state makes it strictly sequential.
#[derive(Clone, Debug)]
pub struct Generator {
    config: GeneratorConfig,
    schema: Schema,
    state: GaussianState,
    factors: [Vec<Vec<f64>>; 4],
    drift_points: BTreeSet<usize>,
    drifts: Vec<DriftEvent>,
    rng: ChaCha8Rng,
    next: usize,
}

impl Generator {
    pub fn new(config: GeneratorConfig) -> Result<Self> {
        config.validate()?;
        let state = GaussianState::initial(config.dimension);
        let factors = [0, 1, 2, 3].map(|i| state.communities[i].cholesky());
        let factors = match factors {
            [Ok(a), Ok(b), Ok(c), Ok(d)] => [a, b, c, d],
            _ => return Err(Error::Config("covariance is not positive definite".into())),
        };
        Ok(Generator {
            schema: synthetic_schema(config.dimension),
            drift_points: config.drift_points.iter().copied().collect(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            state,
            factors,
            drifts: Vec::new(),
            next: 0,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn state(&self) -> &GaussianState {
        &self.state
    }

    /// Drifts applied so far.
    pub fn drifts(&self) -> &[DriftEvent] {
        &self.drifts
    }

    fn sample(&mut self, community: usize) -> Vec<f64> {
        let g = &self.state.communities[community];
        let l = &self.factors[community];
        let d = g.mean.len();
        let z: Vec<f64> = (0..d).map(|_| self.rng.sample(StandardNormal)).collect();
        (0..d)
            .map(|i| g.mean[i] + (0..=i).map(|k| l[i][k] * z[k]).sum::<f64>())
            .collect()
    }

    fn generate_chunk(&mut self, t: usize) -> Chunk {
        let sizes = community_sizes(self.config.spp_schedule[t], self.config.n).expect("validated schedule");
        let sa_deprived = self.schema.deprived_code();
        let sa_favored = self.schema.favored_code();
        let mut instances = Vec::with_capacity(self.config.chunk_size());
        for (community, &(group, label)) in COMMUNITIES.iter().enumerate() {
            for _ in 0..sizes[community] {
                let mut features: Vec<Value> = self.sample(community).into_iter().map(Value::Numeric).collect();
                features.push(Value::Categorical(match group {
                    Group::Deprived => sa_deprived,
                    Group::Favored => sa_favored,
                }));
                instances.push(Instance::new(features, label));
            }
        }
        instances.shuffle(&mut self.rng);
        Chunk::new(t, instances)
    }
}

impl Iterator for Generator {
    type Item = Chunk;

    fn next(&mut self) -> Option<Chunk> {
        let t = self.next;
        if t >= self.config.chunks {
            return None;
        }
        if self.drift_points.contains(&t) {
            let event = apply_drift(&mut self.state, self.config.drift_magnitude_range, t, &mut self.rng);
            self.drifts.push(event);
        }
        self.next += 1;
        Some(self.generate_chunk(t))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.config.chunks - self.next;
        (left, Some(left))
    }
}

/// Companion record written next to a generated stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMetadata {
    pub config: GeneratorConfig,
    pub chunk_size: usize,
    pub instances: usize,
    pub drifts: Vec<DriftEvent>,
    pub final_state: GaussianState,
}

/// Runs the generator to completion.
pub fn generate_stream(config: GeneratorConfig) -> Result<(Schema, Vec<Chunk>, GeneratorMetadata)> {
    let mut generator = Generator::new(config)?;
    let chunks: Vec<Chunk> = generator.by_ref().collect();
    let metadata = GeneratorMetadata {
        config: generator.config.clone(),
        chunk_size: generator.config.chunk_size(),
        instances: chunks.iter().map(Chunk::len).sum(),
        drifts: generator.drifts.clone(),
        final_state: generator.state.clone(),
    };
    Ok((generator.schema.clone(), chunks, metadata))
}
