//! Nonsingular flows indexed by the multiplicative group `c > 0`, with the cocycle,
//! semi-additive functional, additive remainder and Radon-Nikodym factor that enter
//! the generation identity.

use std::fmt;
use std::sync::Arc;

pub type FlowMap = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct FlowSpec {
    pub name: String,
    psi: FlowMap,
    cocycle: FlowMap,
    semiadd: FlowMap,
    remainder: FlowMap,
    radon_nikodym: FlowMap,
    /// `Some(p)` when the state space is a circle of circumference `p`.
    pub circle: Option<f64>,
}

impl fmt::Debug for FlowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowSpec")
            .field("name", &self.name)
            .field("circle", &self.circle)
            .finish()
    }
}

impl FlowSpec {
    /// A flow with unit cocycle, zero semi-additive part, zero remainder and unit Radon-Nikodym factor.
    pub fn new(
        name: impl Into<String>,
        psi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FlowSpec {
            name: name.into(),
            psi: Arc::new(psi),
            cocycle: Arc::new(|_, _| 1.0),
            semiadd: Arc::new(|_, _| 0.0),
            remainder: Arc::new(|_, _| 0.0),
            radon_nikodym: Arc::new(|_, _| 1.0),
            circle: None,
        }
    }

    pub fn with_cocycle(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.cocycle = Arc::new(f);
        self
    }

    pub fn with_semiadditive(
        mut self,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.semiadd = Arc::new(f);
        self
    }

    pub fn with_remainder(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.remainder = Arc::new(f);
        self
    }

    pub fn with_radon_nikodym(
        mut self,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.radon_nikodym = Arc::new(f);
        self
    }

    pub fn on_circle(mut self, period: f64) -> Self {
        self.circle = Some(period);
        self
    }

    pub fn psi(&self, c: f64, x: f64) -> f64 {
        (self.psi)(c, x)
    }

    pub fn cocycle(&self, c: f64, x: f64) -> f64 {
        (self.cocycle)(c, x)
    }

    pub fn semiadd(&self, c: f64, x: f64) -> f64 {
        (self.semiadd)(c, x)
    }

    pub fn remainder(&self, c: f64, x: f64) -> f64 {
        (self.remainder)(c, x)
    }

    pub fn radon_nikodym(&self, c: f64, x: f64) -> f64 {
        (self.radon_nikodym)(c, x)
    }

    /// Distance between two states, modulo the circumference on circles.
    pub fn state_dist(&self, a: f64, b: f64) -> f64 {
        match self.circle {
            Some(p) => crate::numeric::circle_dist(a, b, p),
            None => (a - b).abs(),
        }
    }

    pub fn identity() -> Self {
        FlowSpec::new("identity", |_, x| x)
    }

    /// `x ↦ {x + ln c}` on the unit circle.
    pub fn rotation() -> Self {
        FlowSpec::new("rotation", |c: f64, x: f64| (x + c.ln()).rem_euclid(1.0)).on_circle(1.0)
    }

    /// `x ↦ {x + (ln c)^2}`: violates the group law, kept as a negative control.
    pub fn broken_demo() -> Self {
        FlowSpec::new("broken-demo", |c: f64, x: f64| {
            (x + c.ln().powi(2)).rem_euclid(1.0)
        })
        .on_circle(1.0)
    }
}
