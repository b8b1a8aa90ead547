use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_theorem, BoundResult, Skip, Subject, TheoremId, Tolerances, VerificationReport, VerifyError};
use crate::bounds::BoundParams;
use crate::corpus::{CertTarget, ConvexityCertificate, Corpus, FunctionInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub tol_verify: f64,
    /// Random draws per (theorem, subject).
    pub draws: usize,
    pub quad_tol: f64,
    /// Run the suspect corollaries.
    pub include_suspect: bool,
    /// Restrict to these theorems; `None` runs all of them.
    pub theorems: Option<Vec<TheoremId>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { tol_verify: 1e-9, draws: 64, quad_tol: 1e-12, include_suspect: true, theorems: None }
    }
}

impl SuiteConfig {
    fn tolerances(&self) -> Tolerances {
        Tolerances { tol_verify: self.tol_verify, quad_tol: self.quad_tol }
    }

    fn selected(&self) -> Vec<TheoremId> {
        TheoremId::ALL
            .into_iter()
            .filter(|t| self.theorems.as_ref().is_none_or(|list| list.contains(t)))
            .filter(|t| self.include_suspect || !t.is_suspect())
            .collect()
    }
}

struct Task<'a> {
    theorem: TheoremId,
    subject: Subject<'a>,
    draw: usize,
    params: BoundParams,
}

/// The certificate a single-function theorem draws its `M`, `c`, `q` from.
fn source_cert(inst: &FunctionInstance, theorem: TheoremId) -> Result<ConvexityCertificate, String> {
    let pow = |min_q: f64| {
        inst.certificates
            .iter()
            .find(|c| c.target == CertTarget::AbsDerivativePow && c.exponent() > min_q)
            .copied()
    };
    let found = match theorem {
        TheoremId::H11 | TheoremId::LEMMA1 => inst
            .derivative_bound()
            .map(|m| ConvexityCertificate::new(CertTarget::AbsDerivative, 0.0, m)),
        TheoremId::T1_AA | TheoremId::COR2 => inst.certificate(CertTarget::AbsDerivative).copied(),
        TheoremId::C1_12 | TheoremId::T2_A | TheoremId::COR3 => pow(1.0),
        TheoremId::T3_K | TheoremId::COR4 => pow(0.0).or_else(|| inst.certificate(CertTarget::AbsDerivative).copied()),
        TheoremId::COR5 | TheoremId::COR6 => inst.certificate(CertTarget::Function).copied(),
        _ => None,
    };
    found.ok_or_else(|| {
        let need = match theorem {
            TheoremId::H11 | TheoremId::LEMMA1 => "a declared M",
            TheoremId::T1_AA | TheoremId::COR2 => "an ABS_DERIV certificate",
            TheoremId::C1_12 | TheoremId::T2_A | TheoremId::COR3 => "an ABS_DERIV_POW certificate with q > 1",
            TheoremId::T3_K | TheoremId::COR4 => "an ABS_DERIV or ABS_DERIV_POW certificate",
            _ => "a SELF certificate",
        };
        format!("{} lacks {need}", inst.name)
    })
}

fn holder_conjugate(q: f64) -> f64 {
    q / (q - 1.0)
}

fn single_params(theorem: TheoremId, inst: &FunctionInstance, cert: &ConvexityCertificate, x: Option<f64>) -> BoundParams {
    let (a, b) = inst.interval();
    let mut p = BoundParams::interval(a, b);
    if let Some(x) = x {
        p = p.with_x(x);
    }
    let q = cert.exponent();
    match theorem {
        TheoremId::LEMMA1 => p,
        TheoremId::H11 => p.with_m(cert.m),
        TheoremId::C1_12 => p.with_m(cert.m).with_p(holder_conjugate(q)).with_q(q),
        TheoremId::T1_AA | TheoremId::COR2 => p.with_m(cert.m).with_c(cert.c),
        TheoremId::T2_A | TheoremId::COR3 => p.with_m(cert.m).with_c(cert.c).with_p(holder_conjugate(q)).with_q(q),
        TheoremId::T3_K | TheoremId::COR4 => p.with_m(cert.m).with_c(cert.c).with_q(q),
        TheoremId::COR5 | TheoremId::COR6 => p.with_c(cert.c),
        _ => unreachable!("single-function theorems only"),
    }
}

/// Modulus shared by a product pair: the smaller of the two when both must
/// be strongly convex, `g`'s alone when `f` only needs convexity.
fn pair_modulus(theorem: TheoremId, f: &FunctionInstance, g: &FunctionInstance) -> Result<f64, String> {
    let self_c = |i: &FunctionInstance| {
        i.certificate(CertTarget::Function)
            .map(|c| c.c)
            .ok_or_else(|| format!("{} lacks a SELF certificate", i.name))
    };
    let (cf, cg) = (self_c(f)?, self_c(g)?);
    for i in [f, g] {
        if !i.nonneg {
            return Err(format!("{} is not declared non-negative", i.name));
        }
    }
    if f.interval() != g.interval() {
        return Err(format!("{} and {} live on different intervals", f.name, g.name));
    }
    Ok(match theorem {
        TheoremId::T4_Z1 | TheoremId::T5_Z2 => cf.min(cg),
        _ => cg,
    })
}

fn stream_rng(seed: u64, theorem: TheoremId, subject_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((theorem as u64) << 32) | subject_index as u64);
    rng
}

fn plan<'a>(corpus: &'a Corpus, config: &SuiteConfig, seed: u64, skipped: &mut Vec<Skip>) -> Vec<Task<'a>> {
    let mut tasks = Vec::new();
    let draws = config.draws;
    for theorem in config.selected() {
        if theorem.is_product() {
            for (index, (f, g)) in corpus.resolved_pairs().into_iter().enumerate() {
                let subject = Subject::Pair(f, g);
                let c_max = match pair_modulus(theorem, f, g) {
                    Ok(c) => c,
                    Err(reason) => {
                        skipped.push(Skip { theorem, instance: subject.name(), draw: None, reason });
                        continue;
                    }
                };
                let mut rng = stream_rng(seed, theorem, index);
                let (a, b) = f.interval();
                for draw in 0..draws {
                    let c = if draw == 0 { c_max } else { rng.gen_range(0.0..=c_max) };
                    tasks.push(Task { theorem, subject, draw, params: BoundParams::interval(a, b).with_c(c) });
                }
            }
            continue;
        }
        for (index, inst) in corpus.instances.iter().enumerate() {
            let subject = Subject::Single(inst);
            let cert = match source_cert(inst, theorem) {
                Ok(c) => c,
                Err(reason) => {
                    skipped.push(Skip { theorem, instance: inst.name.clone(), draw: None, reason });
                    continue;
                }
            };
            let mut rng = stream_rng(seed, theorem, index);
            let (a, b) = inst.interval();
            if theorem.is_suspect() {
                // one check at the declared modulus
                tasks.push(Task { theorem, subject, draw: 0, params: single_params(theorem, inst, &cert, None) });
            } else if theorem.uses_point() {
                let margin = (b - a) / 1000.0;
                let interior = (0..draws).map(|_| rng.gen_range(a + margin..=b - margin));
                let fixed = [a, b, 0.5 * (a + b)];
                for (draw, x) in interior.chain(fixed).enumerate() {
                    tasks.push(Task { theorem, subject, draw, params: single_params(theorem, inst, &cert, Some(x)) });
                }
            } else {
                for draw in 0..draws {
                    let mut cert = cert;
                    if draw > 0 {
                        cert.c = rng.gen_range(0.0..=cert.c);
                        cert.m *= rng.gen_range(1.0..=2.0);
                    }
                    tasks.push(Task { theorem, subject, draw, params: single_params(theorem, inst, &cert, None) });
                }
            }
        }
    }
    tasks
}

/// Runs every selected theorem over every premise-compatible instance or
/// pair of `corpus`.
///
/// Parameter draws come from ChaCha8 streams keyed by `(seed, theorem,
/// subject)`, checks run in parallel, and results are sorted by
/// `(theorem, instance, draw)`, so the report depends only on the inputs.
pub fn run_suite(corpus: &Corpus, config: &SuiteConfig, seed: u64) -> Result<VerificationReport, VerifyError> {
    let mut skipped = Vec::new();
    let tasks = plan(corpus, config, seed, &mut skipped);
    let tol = config.tolerances();
    let outcomes: Vec<(&Task, Result<BoundResult, VerifyError>)> =
        tasks.par_iter().map(|t| (t, check_theorem(t.subject, t.theorem, &t.params, tol))).collect();

    let mut results = Vec::with_capacity(outcomes.len());
    for (task, outcome) in outcomes {
        match outcome {
            Ok(mut r) => {
                r.draw = task.draw;
                results.push(r);
            }
            Err(e @ (VerifyError::Premise(_) | VerifyError::Hypothesis(_))) => skipped.push(Skip {
                theorem: task.theorem,
                instance: task.subject.name(),
                draw: Some(task.draw),
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    results.sort_by(|p, q| (p.theorem, &p.instance, p.draw).cmp(&(q.theorem, &q.instance, q.draw)));
    skipped.sort_by(|p, q| (p.theorem, &p.instance, p.draw).cmp(&(q.theorem, &q.instance, q.draw)));
    Ok(VerificationReport::assemble(seed, config.tol_verify, results, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{builtin_corpus, Corpus};

    fn only(names: &[&str]) -> Corpus {
        Corpus {
            instances: builtin_corpus().into_iter().filter(|i| names.contains(&i.name.as_str())).collect(),
            pairs: vec![],
        }
    }

    #[test]
    fn empty_corpus_gives_empty_report() {
        let r = run_suite(&Corpus::default(), &SuiteConfig::default(), 42).unwrap();
        assert!(r.results.is_empty() && r.violations.is_empty() && r.skipped.is_empty());
        assert_eq!(r.totals.checked, 0);
    }

    #[test]
    fn cor5_on_quad_alone() {
        let config = SuiteConfig { theorems: Some(vec![TheoremId::COR5]), ..Default::default() };
        let r = run_suite(&only(&["quad"]), &config, 42).unwrap();
        let s = r.summary[&TheoremId::COR5];
        assert_eq!((s.checked, s.violated, s.suspect), (1, 1, true));
        assert_eq!(r.totals.suspect_violations, 1);
        assert_eq!(r.failing().count(), 0);
    }

    #[test]
    fn suspect_excluded_on_request() {
        let config = SuiteConfig { include_suspect: false, draws: 4, ..Default::default() };
        let r = run_suite(&only(&["quad"]), &config, 1).unwrap();
        assert!(r.results.iter().all(|x| !x.suspect));
    }

    #[test]
    fn builtin_has_no_nonsuspect_violations() {
        let r = run_suite(&Corpus::builtin(), &SuiteConfig::default(), 42).unwrap();
        let failing: Vec<_> = r.failing().collect();
        assert!(failing.is_empty(), "{failing:#?}");
        for t in TheoremId::ALL.into_iter().filter(|t| !t.is_suspect()) {
            assert!(r.summary[&t].checked >= 64, "{t}");
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let config = SuiteConfig { draws: 8, ..Default::default() };
        let a = run_suite(&Corpus::builtin(), &config, 7).unwrap().to_json();
        let b = run_suite(&Corpus::builtin(), &config, 7).unwrap().to_json();
        assert_eq!(a, b);
        let c = run_suite(&Corpus::builtin(), &config, 8).unwrap().to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn interior_draws_respect_margin() {
        let config = SuiteConfig { theorems: Some(vec![TheoremId::H11]), ..Default::default() };
        let r = run_suite(&only(&["cosh"]), &config, 3).unwrap();
        assert_eq!(r.results.len(), 64 + 3);
        for res in r.results.iter().filter(|res| res.draw < 64) {
            let x = res.params.x.unwrap();
            assert!((-1.0 + 0.002..=1.0 - 0.002).contains(&x));
        }
    }

    #[test]
    fn missing_certificates_are_recorded() {
        let config = SuiteConfig { theorems: Some(vec![TheoremId::T2_A]), draws: 2, ..Default::default() };
        let r = run_suite(&only(&["affine"]), &config, 3).unwrap();
        assert!(r.results.is_empty());
        assert_eq!(r.skipped.len(), 1);
        assert!(r.skipped[0].reason.contains("ABS_DERIV_POW"));
    }
}
