use closurelab::budget::{Budget, MAX_GROUP_EXPONENT};
use closurelab::closure::{closedness_exact, closedness_sampled};
use closurelab::forcing::{find_system, matrix_pipeline, RankOneSubset};
use closurelab::hamming::{
    compatibility_exact, compatibility_fraction, counterexample_scenarios, slice_concentration, LayerSet, Relation,
    SliceSet, SliceSubset,
};
use closurelab::rational::{self, display};
use closurelab::tensor::{SimpleSet, Tensor, TensorShape};
use closurelab::walsh::{bogolyubov, large_spectrum, spectral_closedness, Spectrum};
use rand::Rng;
use serde_json::{json, Value};

use crate::manifest::*;
use crate::output::Table;
use crate::CliError;

/// Result of a run before it is wrapped and written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub payload: Value,
    pub table: Table,
    pub status: Status,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some witness was not found within budget; nothing was refuted.
    Unverified,
    /// A checked claim failed.
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Unverified => "unverified",
            Status::Failed => "failed",
        }
    }
}

/// Budgets in force for one run. The environment and the manifest can only
/// lower the group exponent, never raise it past the library limit.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_group_exponent: u32,
    pub max_samples: Option<u64>,
    pub witness_budget: Option<u64>,
}

impl Limits {
    pub fn resolve(b: &Budgets) -> Limits {
        let env = Budget::from_env().max_group_exponent;
        Limits {
            max_group_exponent: b.max_group_exponent.unwrap_or(MAX_GROUP_EXPONENT).min(env),
            max_samples: b.max_samples,
            witness_budget: b.witness_budget,
        }
    }

    fn exponent(&self, n: u32) -> Result<(), CliError> {
        if n > self.max_group_exponent {
            return Err(CliError::Budget(format!(
                "group exponent {n} exceeds the limit {}",
                self.max_group_exponent
            )));
        }
        Ok(())
    }

    fn samples(&self, s: u64) -> Result<(), CliError> {
        match self.max_samples {
            Some(m) if s > m => Err(CliError::Budget(format!("{s} samples exceed the limit {m}"))),
            _ => Ok(()),
        }
    }

    fn tuples(&self, shape: &TensorShape) -> Result<(), CliError> {
        let e: usize = shape.dims().iter().sum();
        match self.witness_budget {
            Some(w) if e >= 64 || (1u64 << e) > w => Err(CliError::Budget(format!(
                "2^{e} factor tuples exceed the witness budget {w}"
            ))),
            _ => Ok(()),
        }
    }
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

pub fn dispatch(m: &ExperimentManifest) -> Result<Outcome, CliError> {
    let limits = Limits::resolve(&m.budgets);
    match m.command {
        Command::Closedness => closedness(m.params()?, m.seed, &limits),
        Command::Spectrum => spectrum(m.params()?, m.seed, &limits),
        Command::Bogolyubov => bogolyubov_cmd(m.params()?, m.seed, &limits),
        Command::ForcingPipeline => forcing(m.params()?, m.seed, &limits),
        Command::SimpleSet => simple_set(m.params()?, &limits),
        Command::Lsystem => lsystem(m.params()?, m.seed, &limits),
        Command::Counterexample => counterexample(m.params()?, m.seed, &limits),
        Command::Scenarios => {
            let _: ScenariosParams = m.params()?;
            scenarios()
        }
    }
}

fn closedness(p: ClosednessParams, seed: u64, limits: &Limits) -> Result<Outcome, CliError> {
    limits.exponent(p.n)?;
    let a = parse_set(&p.a, p.n, seed)?;
    let b = parse_multiset(&p.b, p.n, seed.wrapping_add(1))?;
    let mut table = Table::new(&["mode", "eta", "estimate", "hits", "samples", "radius"]);
    if p.exact {
        let report = closedness_exact(&a, &b)?;
        let eta = report.exact_eta().cloned().expect("exact mode");
        let spectral = spectral_closedness(&a, &b)?;
        let agree = spectral == eta;
        table.push(vec![s("exact"), display(&eta), String::new(), String::new(), String::new(), String::new()]);
        Ok(Outcome {
            payload: json!({
                "n": p.n,
                "a_size": a.size(),
                "b_total": b.total(),
                "eta": display(&eta),
                "report": report,
                "spectral_eta": display(&spectral),
                "spectral_agrees": agree,
            }),
            table,
            status: if agree { Status::Ok } else { Status::Failed },
        })
    } else {
        limits.samples(p.samples)?;
        let elements = a.elements();
        if elements.is_empty() {
            return Err(CliError::Validation("set A is empty".into()));
        }
        let report = closedness_sampled(
            |x| a.contains(x),
            |rng| Ok(elements[rng.random_range(0..elements.len())]),
            &b,
            p.samples,
            seed,
            p.confidence,
            p.radius,
        )?;
        let row = serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        table.push(vec![
            s("sampled"),
            String::new(),
            s(row["estimate"].clone()),
            s(row["hits"].clone()),
            s(row["samples"].clone()),
            s(row["radius"].clone()),
        ]);
        Ok(Outcome {
            payload: json!({ "n": p.n, "a_size": a.size(), "b_total": b.total(), "report": report }),
            table,
            status: Status::Ok,
        })
    }
}

fn spectrum(p: SpectrumParams, seed: u64, limits: &Limits) -> Result<Outcome, CliError> {
    limits.exponent(p.n)?;
    let a = parse_set(&p.set, p.n, seed)?;
    let spec = Spectrum::of_set(&a)?;
    let large = match &p.threshold {
        Some(t) => Some(
            large_spectrum(&a, &parse_rational(t, "threshold")?)?
                .iter()
                .map(|x| format!("{x:x}"))
                .collect::<Vec<_>>(),
        ),
        None => None,
    };
    let mut table = Table::new(&["r", "coeff"]);
    for (r, c) in spec.coeffs().iter().enumerate() {
        table.push(vec![format!("{r:x}"), s(c)]);
    }
    let nonzero = spec.coeffs().iter().filter(|&&c| c != 0).count();
    let mut payload = json!({
        "n": p.n,
        "size": a.size(),
        "nonzero": nonzero,
        "large_spectrum": large,
    });
    if p.n <= 16 {
        payload["coeffs"] = json!(spec.coeffs());
    }
    Ok(Outcome {
        payload,
        table,
        status: Status::Ok,
    })
}

fn bogolyubov_cmd(p: BogolyubovParams, seed: u64, limits: &Limits) -> Result<Outcome, CliError> {
    limits.exponent(p.n)?;
    let a = parse_set(&p.set, p.n, seed)?;
    let r = bogolyubov(&a)?;
    let mut table = Table::new(&["row"]);
    for b in r.subspace.basis() {
        table.push(vec![b.to_hex()]);
    }
    let within = r.subspace.codim() as u64 <= r.codim_bound;
    Ok(Outcome {
        payload: json!({
            "n": p.n,
            "size": a.size(),
            "dim": r.subspace.dim(),
            "codim": r.subspace.codim(),
            "result": r,
        }),
        table,
        status: if within { Status::Ok } else { Status::Failed },
    })
}

fn forcing(p: ForcingParams, seed: u64, limits: &Limits) -> Result<Outcome, CliError> {
    let shape = parse_shape(&p.shape)?;
    limits.exponent(shape.total() as u32)?;
    limits.tuples(&shape)?;
    let delta = parse_rational(&p.delta, "delta")?;
    let epsilon = parse_rational(&p.epsilon, "epsilon")?;
    let b = RankOneSubset::random(&shape, &delta, seed)?;
    let rep = matrix_pipeline(&b, &delta, &epsilon, p.l)?;
    let mut table = Table::new(&["agreement", "arrays"]);
    for (c, k) in &rep.histogram {
        table.push(vec![s(c), s(k)]);
    }
    let status = if !rep.certificate.verified || !rep.reverified || !rep.reduced_check.violations.is_empty() {
        Status::Failed
    } else if !rep.structure.witness.all_verified() {
        Status::Unverified
    } else {
        Status::Ok
    };
    Ok(Outcome {
        payload: json!({ "b_prime": b, "report": rep }),
        table,
        status,
    })
}

fn simple_set(p: SimpleSetParams, limits: &Limits) -> Result<Outcome, CliError> {
    let shape = parse_shape(&p.shape)?;
    limits.exponent(shape.total() as u32)?;
    let spaces = parse_spaces(&shape, &p.spaces)?;
    let translate = match &p.translate {
        Some(h) => parse_tensor(&shape, h)?,
        None => Tensor::zeros(&shape),
    };
    let set = SimpleSet::new(&shape, translate, spaces)?;
    let size = set.size()?;
    let dim = set.subspace()?.dim();
    // independent count by membership over the whole space
    let counted = if shape.total() <= 20 {
        let mut c = 0u128;
        for x in 0..1u64 << shape.total() {
            if set.member(&Tensor::from_index(&shape, x))? {
                c += 1;
            }
        }
        Some(c)
    } else {
        None
    };
    let status = match counted {
        Some(c) if c != size => Status::Failed,
        _ => Status::Ok,
    };
    let mut table = Table::new(&["key", "value"]);
    table.push(vec![s("k"), s(set.k())]);
    table.push(vec![s("dim"), s(dim)]);
    table.push(vec![s("size"), s(size)]);
    if let Some(c) = counted {
        table.push(vec![s("member_count"), s(c)]);
    }
    Ok(Outcome {
        payload: json!({
            "set": set,
            "k": set.k(),
            "dim": dim,
            "size": s(size),
            "member_count": counted.map(s),
        }),
        table,
        status,
    })
}

fn lsystem(p: LsystemParams, seed: u64, limits: &Limits) -> Result<Outcome, CliError> {
    let shape = parse_shape(&p.shape)?;
    limits.exponent(shape.total() as u32)?;
    limits.tuples(&shape)?;
    let delta = parse_rational(&p.delta, "delta")?;
    let b = RankOneSubset::random(&shape, &delta, seed)?;
    let r = find_system(&b, &delta)?;
    let mut status = if r.witness.all_verified() { Status::Ok } else { Status::Unverified };
    let mut table = Table::new(&["key", "value"]);
    table.push(vec![s("bound"), s(r.system.bound())]);
    table.push(vec![s("max_codim"), s(r.max_codim)]);
    table.push(vec![s("size"), s(r.system.size()?)]);
    table.push(vec![s("witness_checked"), s(r.witness.checked)]);
    table.push(vec![s("witness_verified"), s(r.witness.verified)]);
    let mut payload = json!({ "b_prime": b, "result": r, "size": s(r.system.size()?) });
    if let Some(specs) = &p.simple {
        let t = SimpleSet::linear(&shape, parse_spaces(&shape, specs)?)?;
        let inter = closurelab::forcing::system_in_simple(&r.system, &t)?;
        let mut q: Vec<u64> = r.system.elements()?.iter().map(Tensor::to_index).collect();
        q.sort_unstable();
        let mut contained = true;
        for x in inter.elements()? {
            contained &= t.member(&x)? && q.binary_search(&x.to_index()).is_ok();
        }
        if !contained {
            status = Status::Failed;
        }
        table.push(vec![s("intersection_bound"), s(inter.bound())]);
        table.push(vec![s("intersection_size"), s(inter.size()?)]);
        payload["intersection"] = json!({
            "system": inter,
            "size": s(inter.size()?),
            "max_codim": inter.max_codim()?,
            "contained": contained,
        });
    }
    Ok(Outcome { payload, table, status })
}

fn counterexample(p: CounterexampleParams, seed: u64, limits: &Limits) -> Result<Outcome, CliError> {
    limits.samples(p.samples)?;
    let threshold = parse_rational(&p.threshold, "threshold")?;
    let mut rows = Vec::new();
    let mut table = Table::new(&["n", "layer_hi", "slice_w", "estimate", "ci_lo", "ci_hi", "exact"]);
    for &n in &p.n {
        let a = LayerSet::scaled(n, p.c)?;
        let b = SliceSet::root(n)?;
        let est = compatibility_fraction(&a, &SliceSubset::Full(b), p.samples, seed, p.confidence, p.radius)?;
        let exact = compatibility_exact(&a, &b)?;
        table.push(vec![
            s(n),
            s(a.hi),
            s(b.w),
            s(est.estimate),
            s(est.ci_lo),
            s(est.ci_hi),
            s(rational::to_f64(&exact)),
        ]);
        rows.push(json!({
            "n": n,
            "layer": { "lo": a.lo, "hi": a.hi },
            "slice_w": b.w,
            "estimate": est,
            "exact": display(&exact),
        }));
    }
    let estimates: Vec<f64> = rows.iter().map(|r| r["estimate"]["estimate"].as_f64().unwrap_or(f64::NAN)).collect();
    let decreasing = estimates.windows(2).all(|w| w[1] < w[0]);
    let below = estimates.last().is_some_and(|&e| e < 0.05);
    let conc = slice_concentration(p.concentration_n, p.concentration_w, &threshold)?;
    Ok(Outcome {
        payload: json!({
            "c": p.c,
            "rows": rows,
            "strictly_decreasing": decreasing,
            "below_005_at_last": below,
            "concentration": conc,
        }),
        table,
        // the trend is a measurement, not a checked claim
        status: Status::Ok,
    })
}

fn scenarios() -> Result<Outcome, CliError> {
    let rep = counterexample_scenarios()?;
    let mut table = Table::new(&["name", "n", "quantity", "measured", "relation", "bound", "pass"]);
    for r in &rep.rows {
        let rel = match r.relation {
            Relation::Equal => "equal",
            Relation::AtLeast => "at_least",
            Relation::Reference => "reference",
        };
        table.push(vec![
            s(r.name),
            s(r.n),
            s(r.quantity),
            display(&r.measured),
            s(rel),
            display(&r.bound),
            s(r.pass),
        ]);
    }
    let status = if rep.all_pass() { Status::Ok } else { Status::Failed };
    Ok(Outcome {
        payload: json!({ "all_pass": rep.all_pass(), "report": rep }),
        table,
        status,
    })
}
