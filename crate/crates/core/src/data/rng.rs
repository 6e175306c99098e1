use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{StandardNormal, Uniform};

/// A labelled, seeded ChaCha20 stream.
///
/// The label selects the ChaCha stream id (FNV-1a of its bytes), so the
/// "data", "start" and "directions" streams of one seed never overlap.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    label: String,
    rng: ChaCha20Rng,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RngStream {
    pub const ALGORITHM: &'static str = "chacha20";

    pub fn new(seed: u64, label: &str) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(fnv1a(label.as_bytes()));
        Self {
            seed,
            label: label.to_owned(),
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from `[-1, 1]`.
    pub fn uniform_pm1(&mut self) -> f64 {
        let dist = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
        self.rng.sample(dist)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// A point drawn uniformly from the unit sphere in `R^n`.
    pub fn unit_sphere(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.standard_normal()).collect();
            let norm = crate::linalg::norm(&v);
            if norm > 0.0 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }
}
