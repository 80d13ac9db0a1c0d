use crossover_core::geometry::{ellipsoid, fano, obesity, Party};
use crossover_core::model::build_hamiltonian;
use crossover_core::model::{CMatrix, Site, SystemParams, C64};
use crossover_core::spectral::{ground_state, ground_state_numeric, partial_trace, DensityMatrix};
use proptest::prelude::*;

fn density_from(entries: &[f64]) -> DensityMatrix {
    let g = CMatrix::from_iterator(4, 4, entries.chunks(2).map(|c| C64::new(c[0], c[1])));
    let m = &g * g.adjoint();
    let tr = m.trace();
    let m = m / tr;
    let m = (&m + m.adjoint()) * C64::from(0.5);
    DensityMatrix::new(m).unwrap()
}

fn su2(theta: f64, a: f64, b: f64) -> CMatrix {
    let (c, s) = (theta.cos(), theta.sin());
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::from_polar(c, a),
            C64::from_polar(s, b),
            -C64::from_polar(s, -b),
            C64::from_polar(c, -a),
        ],
    )
}

fn full_rank() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 32).prop_filter("near-singular", |v| {
        v.iter().map(|x| x * x).sum::<f64>() > 0.5
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fano_form_reconstructs_state(entries in full_rank()) {
        let rho = density_from(&entries);
        let back = fano(&rho).unwrap().reconstruct();
        let err = (back - rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn obesity_is_local_unitary_invariant(
        entries in full_rank(),
        u in (0.0..3.2f64, 0.0..6.3f64, 0.0..6.3f64),
        v in (0.0..3.2f64, 0.0..6.3f64, 0.0..6.3f64),
    ) {
        let rho = density_from(&entries);
        let w = su2(u.0, u.1, u.2).kronecker(&su2(v.0, v.1, v.2));
        let rotated = DensityMatrix::new(&w * rho.matrix() * w.adjoint()).unwrap();
        let before = fano(&rho).unwrap();
        let after = fano(&rotated).unwrap();
        let (o0, o1) = (obesity(&before), obesity(&after));
        // Ω⁴ = |det R| is the well-conditioned quantity; the fourth root
        // amplifies rounding when the determinant is near zero.
        prop_assert!((o0.powi(4) - o1.powi(4)).abs() < 1e-12, "{o0} {o1}");
        if o0 > 1e-2 {
            prop_assert!((o0 - o1).abs() < 1e-10);
        }
        let (e0, e1) = (ellipsoid(&before, Party::First), ellipsoid(&after, Party::First));
        prop_assert!((e0.volume - e1.volume).abs() < 1e-9 * (1.0 + e0.volume));
    }

    #[test]
    fn ellipsoid_fits_in_bloch_ball(entries in full_rank()) {
        let f = fano(&density_from(&entries)).unwrap();
        for party in [Party::First, Party::Second] {
            let e = ellipsoid(&f, party);
            prop_assert!(e.semiaxes[0] <= 1.0 + 1e-9);
            prop_assert!(e.center.norm() + e.semiaxes[2] <= 1.0 + 1e-9);
            prop_assert!(e.volume <= 4.0 * std::f64::consts::PI / 3.0 + 1e-9);
        }
    }

    #[test]
    fn analytic_and_numeric_ground_states_agree(j in 0.0..2.0f64, jc in 0.01..3.0f64) {
        let p = SystemParams::new(0.1, 5.0, j, jc).unwrap();
        let (g, _) = ground_state(&p).unwrap();
        let n = ground_state_numeric(&build_hamiltonian(&p)).unwrap();
        prop_assert!(g.fidelity(&n) >= 1.0 - 1e-10);
        prop_assert!((g.energy - n.energy).abs() < 1e-10 * (1.0 + n.energy.abs()));
    }

    #[test]
    fn signal_pair_is_exchange_symmetric(j in 0.0..2.0f64, jc in 0.0..3.0f64) {
        let p = SystemParams::new(0.1, 5.0, j, jc).unwrap();
        let rho = ground_state(&p).unwrap().0.density();
        let ra = partial_trace(&rho, &[Site::A]).unwrap();
        let rb = partial_trace(&rho, &[Site::B]).unwrap();
        let rac = partial_trace(&rho, &[Site::A, Site::C]).unwrap();
        let rbc = partial_trace(&rho, &[Site::B, Site::C]).unwrap();
        prop_assert!((ra.matrix() - rb.matrix()).norm() < 1e-12);
        prop_assert!((rac.matrix() - rbc.matrix()).norm() < 1e-12);
    }
}
