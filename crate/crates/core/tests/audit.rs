use privrec_core::audit::{privacy_audit, AuditMechanism};
use privrec_core::mechanisms::smoothing_param_for_privacy;

#[test]
fn exponential_audit_stays_within_twice_epsilon() {
    for eps in [0.1, 0.5, 1.0] {
        let report = privacy_audit(AuditMechanism::Exponential, eps, 6).unwrap();
        assert!(report.max_ln_ratio <= 2.0 * eps + 1e-6, "{report:?}");
        assert!(report.kappa <= 2.0 + 1e-6);
        let w = report.witness.as_ref().unwrap();
        assert!(w.target != w.flipped.0 && w.target != w.flipped.1);
    }
}

#[test]
fn laplace_audit_on_five_nodes() {
    let report = privacy_audit(AuditMechanism::Laplace, 0.5, 5).unwrap();
    assert!(report.max_ln_ratio <= 2.0 * 0.5 + 1e-6, "{report:?}");
    assert!(report.instances > 0);
}

#[test]
fn smoothing_audit_respects_its_guarantee() {
    for c in [0.1, 0.5] {
        let x = smoothing_param_for_privacy(c, 5).unwrap();
        let report = privacy_audit(AuditMechanism::Smoothing { x }, 0.0, 6).unwrap();
        assert!(report.max_excess <= 1e-6, "{report:?}");
    }
}

#[test]
fn unchanged_utilities_give_unit_ratio() {
    // on two and three nodes no non-incident flip can touch a candidate's utility
    // without r having a neighbor, and with uniform utilities the ratio is exactly 1
    let report = privacy_audit(AuditMechanism::Exponential, 0.5, 3).unwrap();
    assert!(report.max_ln_ratio <= 0.5 + 1e-12);
    let x = smoothing_param_for_privacy(0.3, 4).unwrap();
    let two = privacy_audit(AuditMechanism::Smoothing { x }, 0.0, 2).unwrap();
    assert_eq!(two.max_ln_ratio, 0.0);
}
