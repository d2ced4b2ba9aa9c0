use holoxl_wasm_demo::{ao_run, coupling_curve, phase_error_map};

#[test]
fn phase_error_falls_with_range() {
    let map = phase_error_map(2.0, 30.0, 12, 5).unwrap();
    assert_eq!(map.error.len(), 5);
    for row in &map.error {
        assert_eq!(row.len(), 12);
        assert!(row[0] > row[11]);
    }
    assert!(phase_error_map(2.0, 30.0, 1, 5).is_err());
}

#[test]
fn ao_run_reports_a_consistent_run() {
    let out = ao_run("AO", 1.0, -46.0, 600.0, 2).unwrap();
    assert_eq!(out.positions.len(), out.num_microstrips * out.elements_per_strip);
    assert_eq!(out.weight_abs.len(), out.positions.len());
    assert!(out.rate_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    assert!(out.rate <= out.fully_digital_rate + 1e-6);
    assert!(ao_run("XX", 1.0, -46.0, 600.0, 2).is_err());
    assert!(ao_run("UC", 8.0, -46.0, 600.0, 2).is_err());
}

#[test]
fn coupling_is_weaker_for_short_elements() {
    let c = coupling_curve(0.2, 3.0, 15).unwrap();
    assert_eq!(c.spacing.len(), 15);
    for (m, h) in c.metamaterial.iter().zip(&c.half_wave) {
        assert!(m < h);
    }
    assert!(coupling_curve(1.0, 0.5, 10).is_err());
}
