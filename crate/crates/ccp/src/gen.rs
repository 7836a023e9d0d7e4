//! Benchmark instance generators.
//!
//! Random numbers come from xoshiro256++ seeded with `seed_from_u64` (SplitMix64
//! expansion of the seed). Integers in `[a, b]` are `a + next_u64() % (b - a + 1)`;
//! reals in `[a, b)` are `a + (b - a) * (next_u64() >> 11) * 2^-53`. Draws happen
//! in the order the fields are listed in each generator.

use std::collections::BTreeMap;

use ccp_core::model::LinearConstraint;
use ccp_core::{CcpInstance, InstanceData, Rational, Sense};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("{0} must be positive")]
    Zero(&'static str),
    #[error("risk level must lie in (0, 1)")]
    Epsilon,
    #[error("{name} = {value} outside {range}")]
    Range {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

pub struct Draw(Xoshiro256PlusPlus);

impl Draw {
    pub fn new(seed: u64) -> Self {
        Draw(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.0.next_u64() % span) as i64
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        let unit = (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * unit
    }
}

/// Resource planning: resources `x_i` split into service amounts `y_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcrpParams {
    pub resources: usize,
    pub services: usize,
}

impl Default for CcrpParams {
    fn default() -> Self {
        CcrpParams {
            resources: 20,
            services: 30,
        }
    }
}

/// Multiperiod capacity expansion with coal and nuclear plants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcmppParams {
    pub periods: usize,
    /// Largest share of nuclear capacity.
    pub nuclear_share: f64,
    pub coal_life: usize,
    pub nuclear_life: usize,
}

impl Default for CcmppParams {
    fn default() -> Self {
        CcmppParams {
            periods: 10,
            nuclear_share: 0.3,
            coal_life: 15,
            nuclear_life: 10,
        }
    }
}

/// Lot sizing with cumulative demand rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CclsParams {
    pub periods: usize,
}

impl Default for CclsParams {
    fn default() -> Self {
        CclsParams { periods: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Ccrp(CcrpParams),
    Ccmpp(CcmppParams),
    Ccls(CclsParams),
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Ccrp(_) => "ccrp",
            Family::Ccmpp(_) => "ccmpp",
            Family::Ccls(_) => "ccls",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub epsilon: Rational,
    pub seed: u64,
}

pub fn generate(spec: &GenSpec) -> Result<CcpInstance, ParamError> {
    if spec.n == 0 {
        return Err(ParamError::Zero("n"));
    }
    if spec.epsilon <= Rational::ZERO || spec.epsilon >= Rational::ONE {
        return Err(ParamError::Epsilon);
    }
    let data = match spec.family {
        Family::Ccrp(p) => ccrp(spec, p)?,
        Family::Ccmpp(p) => ccmpp(spec, p)?,
        Family::Ccls(p) => ccls(spec, p)?,
    };
    Ok(CcpInstance::new(data).expect("generated instances are valid"))
}

fn uniform_probs(n: usize) -> Vec<Rational> {
    vec![Rational::new(1, n as i128).expect("n > 0"); n]
}

fn name(spec: &GenSpec, size: String) -> String {
    format!("{}-{}-n{}-e{}_{}-s{}", spec.family.label(), size, spec.n, spec.epsilon.numer(), spec.epsilon.denom(), spec.seed)
}

fn ccrp(spec: &GenSpec, p: CcrpParams) -> Result<InstanceData, ParamError> {
    let (ni, nj) = (p.resources, p.services);
    if ni == 0 {
        return Err(ParamError::Zero("resources"));
    }
    if nj == 0 {
        return Err(ParamError::Zero("services"));
    }
    let mut rng = Draw::new(spec.seed);
    let cost_x: Vec<f64> = (0..ni).map(|_| rng.real(1.0, 10.0)).collect();
    // (0.8, 1] as 1 - [0, 0.2)
    let yield_: Vec<f64> = (0..ni).map(|_| 1.0 - rng.real(0.0, 0.2)).collect();
    let rate: Vec<Vec<f64>> = (0..ni).map(|_| (0..nj).map(|_| rng.real(0.5, 2.0)).collect()).collect();
    let scenarios: Vec<Vec<f64>> = (0..spec.n).map(|_| (0..nj).map(|_| rng.real(10.0, 100.0)).collect()).collect();
    // columns: x_0..x_{I-1}, then y_ij at I + i*J + j
    let d = ni + ni * nj;
    let y = |i: usize, j: usize| ni + i * nj + j;
    let mut cost = vec![0.0; d];
    cost[..ni].copy_from_slice(&cost_x);
    let tech = (0..nj)
        .map(|j| {
            let mut row = vec![0.0; d];
            for i in 0..ni {
                row[y(i, j)] = rate[i][j];
            }
            row
        })
        .collect();
    let constraints = (0..ni)
        .map(|i| {
            let mut coeffs = vec![0.0; d];
            for j in 0..nj {
                coeffs[y(i, j)] = 1.0;
            }
            coeffs[i] = -yield_[i];
            LinearConstraint {
                coeffs,
                sense: Sense::Le,
                rhs: 0.0,
            }
        })
        .collect();
    Ok(InstanceData {
        name: name(spec, format!("{ni}x{nj}")),
        cost,
        tech,
        constraints,
        lower: vec![0.0; d],
        upper: vec![f64::INFINITY; d],
        scenarios,
        probs: uniform_probs(spec.n),
        epsilon: spec.epsilon,
        metadata: BTreeMap::new(),
    })
}

fn ccmpp(spec: &GenSpec, p: CcmppParams) -> Result<InstanceData, ParamError> {
    let t_max = p.periods;
    if t_max == 0 {
        return Err(ParamError::Zero("periods"));
    }
    if !(0.0..=1.0).contains(&p.nuclear_share) {
        return Err(ParamError::Range {
            name: "nuclear share",
            value: p.nuclear_share,
            range: "[0, 1]",
        });
    }
    if p.coal_life == 0 {
        return Err(ParamError::Zero("coal life"));
    }
    if p.nuclear_life == 0 {
        return Err(ParamError::Zero("nuclear life"));
    }
    let mut rng = Draw::new(spec.seed);
    let coal_cost: Vec<f64> = (0..t_max).map(|_| rng.int(100, 300) as f64).collect();
    let nuclear_cost: Vec<f64> = (0..t_max).map(|_| rng.int(100, 200) as f64).collect();
    let e1 = rng.int(100, 500) as f64;
    let decay = rng.real(0.7, 1.0);
    let existing: Vec<f64> = (0..t_max).map(|t| e1 * decay.powi(t as i32)).collect();
    let demand: Vec<Vec<f64>> = (0..spec.n)
        .map(|_| (0..t_max).map(|_| rng.int(300, 700) as f64).collect())
        .collect();
    // columns: x_t (coal) then y_t (nuclear); plants built in period j serve
    // periods t with t - life + 1 <= j <= t (0-based)
    let d = 2 * t_max;
    let live = |life: usize, t: usize| (t + 1).saturating_sub(life)..=t;
    let mut cost = coal_cost.clone();
    cost.extend(&nuclear_cost);
    let mut tech = Vec::with_capacity(t_max);
    let mut constraints = Vec::with_capacity(t_max);
    let f = p.nuclear_share;
    for t in 0..t_max {
        let mut row = vec![0.0; d];
        for j in live(p.coal_life, t) {
            row[j] = 1.0;
        }
        for j in live(p.nuclear_life, t) {
            row[t_max + j] = 1.0;
        }
        tech.push(row);
        // nuclear <= f (existing + coal + nuclear)
        let mut coeffs = vec![0.0; d];
        for j in live(p.coal_life, t) {
            coeffs[j] = -f;
        }
        for j in live(p.nuclear_life, t) {
            coeffs[t_max + j] = 1.0 - f;
        }
        constraints.push(LinearConstraint {
            coeffs,
            sense: Sense::Le,
            rhs: f * existing[t],
        });
    }
    let scenarios = demand
        .iter()
        .map(|dem| dem.iter().zip(&existing).map(|(a, e)| (a - e).max(0.0)).collect())
        .collect();
    let mut metadata = BTreeMap::new();
    metadata.insert("existing_capacity".to_string(), existing);
    Ok(InstanceData {
        name: name(spec, format!("T{t_max}")),
        cost,
        tech,
        constraints,
        lower: vec![0.0; d],
        upper: vec![f64::INFINITY; d],
        scenarios,
        probs: uniform_probs(spec.n),
        epsilon: spec.epsilon,
        metadata,
    })
}

fn ccls(spec: &GenSpec, p: CclsParams) -> Result<InstanceData, ParamError> {
    let t_max = p.periods;
    if t_max == 0 {
        return Err(ParamError::Zero("periods"));
    }
    let mut rng = Draw::new(spec.seed);
    let setup: Vec<f64> = (0..t_max).map(|_| rng.real(1.0, 1000.0)).collect();
    let unit: Vec<f64> = (0..t_max).map(|_| rng.real(1.0, 10.0)).collect();
    let holding: Vec<f64> = (0..t_max).map(|_| rng.real(1.0, 5.0)).collect();
    let scenarios: Vec<Vec<f64>> = (0..spec.n)
        .map(|_| {
            let mut acc = 0.0;
            (0..t_max)
                .map(|_| {
                    acc += rng.int(1, 100) as f64;
                    acc
                })
                .collect()
        })
        .collect();
    // production y_t; cumulative u_t = sum_{j <= t} y_j is the row activity.
    // Holding h_t (u_t - D_t) contributes h_t to every y_j with j <= t.
    let cost: Vec<f64> = (0..t_max)
        .map(|j| unit[j] + holding[j..].iter().sum::<f64>())
        .collect();
    let tech = (0..t_max)
        .map(|t| (0..t_max).map(|j| if j <= t { 1.0 } else { 0.0 }).collect())
        .collect();
    let n = spec.n as f64;
    let expected_cum: Vec<f64> = (0..t_max)
        .map(|t| scenarios.iter().map(|s| s[t]).sum::<f64>() / n)
        .collect();
    let holding_constant: f64 = holding.iter().zip(&expected_cum).map(|(h, d)| h * d).sum();
    let mut metadata = BTreeMap::new();
    metadata.insert("setup_cost".to_string(), setup);
    metadata.insert("holding_cost".to_string(), holding);
    metadata.insert("objective_offset".to_string(), vec![-holding_constant]);
    Ok(InstanceData {
        name: name(spec, format!("T{t_max}")),
        cost,
        tech,
        constraints: Vec::new(),
        lower: vec![0.0; t_max],
        upper: vec![f64::INFINITY; t_max],
        scenarios,
        probs: uniform_probs(spec.n),
        epsilon: spec.epsilon,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::instance_to_json;

    fn spec(family: Family, n: usize) -> GenSpec {
        GenSpec {
            family,
            n,
            epsilon: Rational::new(1, 10).unwrap(),
            seed: 7,
        }
    }

    #[test]
    fn ccmpp_dimensions() {
        let inst = generate(&spec(Family::Ccmpp(CcmppParams::default()), 100)).unwrap();
        assert_eq!((inst.num_rows(), inst.num_vars(), inst.num_scenarios()), (10, 20, 100));
        assert!(inst.probs().iter().all(|&p| p == Rational::new(1, 100).unwrap()));
        // coal plants outlive the horizon: every coal column up to t serves period t
        for t in 0..10 {
            assert!((0..=t).all(|j| inst.tech_row(t)[j] == 1.0));
        }
    }

    #[test]
    fn ccrp_dimensions() {
        let inst = generate(&spec(Family::Ccrp(CcrpParams::default()), 50)).unwrap();
        assert_eq!((inst.num_vars(), inst.num_rows()), (620, 30));
        assert_eq!(inst.constraints().len(), 20);
    }

    #[test]
    fn ccls_scenarios_are_cumulative() {
        let inst = generate(&spec(Family::Ccls(CclsParams { periods: 5 }), 40)).unwrap();
        assert_eq!(inst.num_rows(), 5);
        for i in 0..40 {
            assert!(inst.scenario(i).windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for family in [
            Family::Ccrp(CcrpParams {
                resources: 3,
                services: 4,
            }),
            Family::Ccmpp(CcmppParams::default()),
            Family::Ccls(CclsParams::default()),
        ] {
            let a = instance_to_json(&generate(&spec(family, 30)).unwrap());
            let b = instance_to_json(&generate(&spec(family, 30)).unwrap());
            assert_eq!(a, b);
            let mut other = spec(family, 30);
            other.seed = 8;
            assert_ne!(a, instance_to_json(&generate(&other).unwrap()));
        }
    }

    #[test]
    fn bad_parameters() {
        let mut s = spec(Family::Ccls(CclsParams { periods: 0 }), 10);
        assert_eq!(generate(&s), Err(ParamError::Zero("periods")));
        s.family = Family::Ccls(CclsParams::default());
        s.epsilon = Rational::ONE;
        assert_eq!(generate(&s), Err(ParamError::Epsilon));
    }

    #[test]
    fn draws_stay_in_range() {
        let mut d = Draw::new(1);
        for _ in 0..1000 {
            let a = d.int(300, 700);
            assert!((300..=700).contains(&a));
            let x = d.real(0.7, 1.0);
            assert!((0.7..1.0).contains(&x));
        }
    }
}
