//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Instance, Mode, Point, Site, SupplyProfile};

use super::{format::write_instance, CliError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub seed: u64,
    /// Independent sub-sequence of `seed`, used to number bench instances.
    pub stream: u64,
    pub sites: usize,
    pub fleet: usize,
    pub mode: Mode,
    /// Sites are uniform in `[0, side]^2`; the depot sits at the center.
    pub side: f64,
    pub capacity: f64,
    pub horizon: f64,
    pub q_min: f64,
    pub q_max: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            seed: 0,
            stream: 0,
            sites: 10,
            fleet: 2,
            mode: Mode::Mprp,
            side: 100.0,
            capacity: 100.0,
            horizon: 480.0,
            q_min: 10.0,
            q_max: 50.0,
        }
    }
}

impl GeneratorParams {
    fn check(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Usage(msg.to_string()));
        if self.fleet == 0 {
            return bad("--m must be at least 1");
        }
        if !(self.side.is_finite() && self.side >= 0.0) {
            return bad("--side must be finite and nonnegative");
        }
        if !(self.capacity.is_finite() && self.capacity > 0.0) {
            return bad("--capacity must be positive");
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("--horizon must be positive");
        }
        if !(self.q_min.is_finite() && self.q_max.is_finite() && 0.0 < self.q_min && self.q_min <= self.q_max) {
            return bad("quantities need 0 < --q-min <= --q-max");
        }
        Ok(())
    }

    /// Ratio of the quantity range, an upper bound on the instance's alpha.
    pub fn alpha(&self) -> f64 {
        self.q_max / self.q_min
    }
}

pub fn generate_instance(params: &GeneratorParams) -> Result<Instance, CliError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(params.stream);
    let t = params.horizon;
    let sites = (1..=params.sites)
        .map(|id| {
            let x = rng.random_range(0.0..=params.side);
            let y = rng.random_range(0.0..=params.side);
            let (open, close) = loop {
                let a: f64 = rng.random_range(0.0..=t);
                let b: f64 = rng.random_range(0.0..=t);
                let (open, close) = (a.min(b), a.max(b));
                // a ramp needs a window of positive length
                if close > open || !params.mode.has_variable_supply() {
                    break (open, close);
                }
            };
            let q = rng.random_range(params.q_min..=params.q_max);
            let supply = if params.mode.has_variable_supply() {
                SupplyProfile::LinearRamp(q)
            } else {
                SupplyProfile::Fixed(q)
            };
            Site::new(id, Point::new(x, y), (open, close), supply)
        })
        .collect();
    let center = Point::new(params.side / 2.0, params.side / 2.0);
    Instance::new(sites, center, params.fleet, params.capacity, t, params.mode)
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// The instance file, with the quantity range's alpha noted for ramped
/// supply.
pub fn cmd_generate(params: &GeneratorParams) -> Result<String, CliError> {
    let instance = generate_instance(params)?;
    let body = write_instance(&instance);
    if params.mode.has_variable_supply() {
        Ok(format!("# alpha = {}\n{body}", params.alpha()))
    } else {
        Ok(body)
    }
}
