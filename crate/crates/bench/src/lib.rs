//! Fixed problem instances for the criterion benchmarks.

use superscs::bench::{Family, GeneratorSpec};
use superscs::ConicProblem;

pub struct Fixture {
    pub name: &'static str,
    pub problem: ConicProblem,
}

fn make(name: &'static str, family: Family, seed: u64) -> Fixture {
    let problem = GeneratorSpec::new(family, seed)
        .generate()
        .expect("fixture specs are valid");
    Fixture { name, problem }
}

/// One small instance per generator family.
pub fn fixtures() -> Vec<Fixture> {
    vec![
        make("lasso-100x20", Family::Lasso { n: 100, m: 20, cond: 1e3, mu: 0.1 }, 1),
        make("l1pca-10", Family::L1Pca { d: 10, lambda: 0.1 }, 1),
        make("logreg-10x40", Family::LogReg { p: 10, q: 40, lambda: 0.1 }, 1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_distinct_and_valid() {
        let f = fixtures();
        assert_eq!(f.len(), 3);
        for x in &f {
            assert!(x.problem.n() > 0 && x.problem.m() > 0, "{}", x.name);
        }
    }
}
