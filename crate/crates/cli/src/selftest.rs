use closurelab::closure::{closedness_exact, sample_stream, triangle_compose};
use closurelab::gf2::{BitVector, Subspace};
use closurelab::rational::{int, zero};
use closurelab::walsh::{character_sum, mu_hat, parseval_holds, spectral_closedness, wht, GroupMultiset, GroupSet};
use rand::Rng;
use serde::Serialize;

/// A deliberate defect for exercising the failure path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Perturbs one transform coefficient after it is computed.
    Wht,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRow {
    pub name: &'static str,
    pub cases: u64,
    pub passed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckRow>,
    pub all_pass: bool,
}

fn random_set(rng: &mut impl Rng, n: u32) -> GroupSet {
    let s = GroupSet::from_predicate(n, |_| rng.random_bool(0.5)).expect("n ≤ 10");
    if s.is_empty() {
        GroupSet::from_elements(n, [0]).expect("n ≤ 10")
    } else {
        s
    }
}

/// Exact identities at `n ≤ 10`: Parseval and character sums, subspace
/// measure spectra, spectral closedness and the triangle inequality.
pub fn selftest(seed: u64, fault: Option<Fault>) -> SelftestReport {
    let mut checks = Vec::new();

    let mut row = CheckRow { name: "wht_parseval", cases: 0, passed: 0 };
    let mut rng = sample_stream(seed, 0);
    for _ in 0..40 {
        let n = rng.random_range(1..=10u32);
        let f: Vec<i64> = (0..1usize << n).map(|_| rng.random_range(-5..=5)).collect();
        row.cases += 1;
        let Ok(mut coeffs) = wht(&f) else { continue };
        if fault == Some(Fault::Wht) {
            coeffs[1] += 1;
        }
        let probes = [0u64, 1, (1u64 << n) - 1];
        if parseval_holds(n, &f, &coeffs) && probes.iter().all(|&r| coeffs[r as usize] == character_sum(&f, r)) {
            row.passed += 1;
        }
    }
    checks.push(row);

    let mut row = CheckRow { name: "subspace_mu_hat", cases: 0, passed: 0 };
    let mut rng = sample_stream(seed, 1);
    for _ in 0..30 {
        let n = rng.random_range(1..=8usize);
        let gens: Vec<u64> = (0..rng.random_range(0..=n)).map(|_| rng.random_range(0..1u64 << n)).collect();
        let w = Subspace::from_indices(n, &gens);
        let perp = w.orthogonal_complement();
        row.cases += 1;
        let ok = GroupMultiset::from_elements(n as u32, w.enumerate_indices().unwrap_or_default())
            .and_then(|b| mu_hat(&b))
            .map(|m| {
                (0..1u64 << n).all(|r| {
                    let want = if perp.contains(&BitVector::from_index(n, r)) { int(1) } else { zero() };
                    m.get(r) == want
                })
            })
            .unwrap_or(false);
        row.passed += u64::from(ok);
    }
    checks.push(row);

    let mut row = CheckRow { name: "spectral_closedness", cases: 0, passed: 0 };
    let mut rng = sample_stream(seed, 2);
    for _ in 0..30 {
        let n = rng.random_range(2..=10u32);
        let a = random_set(&mut rng, n);
        let b = GroupMultiset::from_counts(n, (0..rng.random_range(1..6)).map(|_| (rng.random_range(0..1u64 << n), rng.random_range(1..4))))
            .expect("n ≤ 10");
        row.cases += 1;
        let ok = match (closedness_exact(&a, &b), spectral_closedness(&a, &b)) {
            (Ok(c), Ok(sp)) => c.exact_eta() == Some(&sp),
            _ => false,
        };
        row.passed += u64::from(ok);
    }
    checks.push(row);

    let mut row = CheckRow { name: "triangle_deficit", cases: 0, passed: 0 };
    let mut rng = sample_stream(seed, 3);
    for _ in 0..30 {
        let n = rng.random_range(2..=10u32);
        let a = random_set(&mut rng, n);
        let (b1, b2) = (rng.random_range(0..1u64 << n), rng.random_range(0..1u64 << n));
        row.cases += 1;
        row.passed += u64::from(triangle_compose(&a, b1, b2).is_ok());
    }
    checks.push(row);

    let all_pass = checks.iter().all(|c| c.cases == c.passed);
    SelftestReport { seed, checks, all_pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes_and_fault_is_caught() {
        assert!(selftest(0, None).all_pass);
        let bad = selftest(0, Some(Fault::Wht));
        assert!(!bad.all_pass);
        assert_eq!(bad.checks[0].passed, 0);
    }
}
