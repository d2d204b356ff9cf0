use ldpshift_core::attacks::{Attack, AttackSpec, SwRange};
use ldpshift_core::detect::ZeroShotConfig;
use ldpshift_core::mechanism::collect;
use ldpshift_core::metrics::{roc_auc, wasserstein1};
use ldpshift_core::trial::{run_attacked_trial, TrialOptions};
use ldpshift_core::{Dataset, Mechanism, MechanismConfig, Protocol, RngStream, Setting};
use proptest::prelude::*;

fn gaussian(n: usize, seed: u64) -> Dataset {
    Dataset::gaussian(n, 0.0, 10.0, &mut RngStream::new(seed)).unwrap()
}

fn mechanisms(eps: f64) -> Vec<Mechanism> {
    let cfg = MechanismConfig::default();
    let mut out = Vec::new();
    for p in Protocol::ALL {
        for s in [Setting::User, Setting::Server] {
            if s == Setting::Server && !p.has_setting() {
                continue;
            }
            out.push(Mechanism::new(p, s, eps, &cfg).unwrap());
        }
    }
    out
}

#[test]
fn clean_collection_recovers_the_distribution() {
    let data = gaussian(50_000, 1);
    for (k, mech) in mechanisms(2.0).into_iter().enumerate() {
        let truth = data.histogram(mech.eval_bins());
        let (reports, assignment) = collect(&data, &mech, &mut RngStream::new(9).substream(k as u64)).unwrap();
        assert_eq!(reports.len(), data.len());
        let est = mech.estimate_eval(&reports, assignment.as_ref().map(|a| a.seeds())).unwrap();
        assert!((est.total() - 1.0).abs() < 1e-9);
        let w1 = wasserstein1(&truth, &est).unwrap();
        assert!(w1 < 0.03, "{:?}: W1 {w1}", mech.protocol());
    }
}

#[test]
fn crafted_attacks_shift_right() {
    let data = gaussian(20_000, 2);
    let options = TrialOptions::default();
    for (k, mech) in mechanisms(0.5).into_iter().enumerate() {
        let attack = if mech.protocol() == Protocol::Sw { Attack::Sw(SwRange::AboveOne) } else { Attack::Crafted };
        let out = run_attacked_trial(&data, &mech, &AttackSpec::new(attack, 0.1).unwrap(), &options, &RngStream::new(k as u64))
            .unwrap();
        assert!(out.asg > 0.0, "{:?} {:?}: {}", mech.protocol(), mech.setting(), out.asg);
        let clean = run_attacked_trial(&data, &mech, &AttackSpec::new(attack, 0.0).unwrap(), &options, &RngStream::new(k as u64))
            .unwrap();
        assert_eq!((clean.n_fake, clean.sgr), (0, None));
    }
}

/// Zero-shot verdicts for `trials` runs of `spec`.
fn verdicts(data: &Dataset, mech: &Mechanism, spec: &AttackSpec, trials: u64, stream: u64) -> Vec<(f64, bool)> {
    let options = TrialOptions { zero_shot: Some(ZeroShotConfig::default()), mud: false };
    let root = RngStream::new(31).substream(stream);
    (0..trials)
        .map(|t| {
            let v = run_attacked_trial(data, mech, spec, &options, &root.substream(t)).unwrap().zero_shot.unwrap();
            (v.p_value, v.polluted)
        })
        .collect()
}

#[test]
fn baseline_attack_is_not_detectable() {
    let data = gaussian(20_000, 3);
    let mech = Mechanism::new(Protocol::Oue, Setting::User, 0.6, &MechanismConfig::default()).unwrap();
    let attacked = verdicts(&data, &mech, &AttackSpec::new(Attack::Baseline, 0.05).unwrap(), 30, 0);
    let clean = verdicts(&data, &mech, &AttackSpec::new(Attack::Baseline, 0.0).unwrap(), 30, 1);
    let scores: Vec<f64> = attacked.iter().chain(&clean).map(|v| 1.0 - v.0).collect();
    let labels: Vec<bool> = (0..60).map(|i| i < 30).collect();
    let auc = roc_auc(&scores, &labels).unwrap();
    assert!((0.35..=0.65).contains(&auc), "AUC {auc}");

    let false_alarms = clean.iter().filter(|v| v.1).count();
    assert!(false_alarms <= 3, "{false_alarms} of 30 clean trials flagged");
}

#[test]
fn crafted_grr_attack_is_detected() {
    let data = gaussian(20_000, 4);
    let mech = Mechanism::new(Protocol::Grr, Setting::User, 0.6, &MechanismConfig::default()).unwrap();
    let hits = verdicts(&data, &mech, &AttackSpec::new(Attack::Crafted, 0.05).unwrap(), 10, 2);
    assert!(hits.iter().filter(|v| v.1).count() >= 9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_ratio_within_budget(eps in 0.05f64..6.0, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed);
        let seeds: Vec<u64> = (0..32).map(|_| rand::RngCore::next_u64(&mut rng)).collect();
        for mech in mechanisms(eps) {
            let ratio = mech.max_output_ratio(&seeds);
            prop_assert!(ratio <= eps.exp() * (1.0 + 1e-12), "{:?} eps {eps}: {ratio}", mech.protocol());
        }
    }
}
