use dirac_spectral::bcond::{lagrange_boundary_form, BcKind, BoundaryMatrix};
use dirac_spectral::chardet::{char_det, delta, delta_expansion};
use dirac_spectral::cli::{BcSource, RunConfig};
use dirac_spectral::evolve::{fundamental_matrix, transfer_matrix};
use dirac_spectral::potential::{gauge_reduce, Channel, Mesh, PotentialSpec};
use dirac_spectral::resolvent::green_kernel;
use dirac_spectral::{c64, Complex64, DiracError, DiracOperator, Matrix2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn regular_bc(seed: u64) -> BoundaryMatrix {
    BoundaryMatrix::random_regular(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn cplx(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c64(a, b))
}

fn strip_lambda() -> impl Strategy<Value = Complex64> {
    (-15.0..15.0f64, -2.0..2.0f64).prop_map(|(a, b)| c64(a, b))
}

fn offdiag_potential() -> impl Strategy<Value = PotentialSpec> {
    (cplx(2.0), cplx(2.0), 0.0..0.9f64, 0usize..3).prop_map(|(a, b, alpha, kind)| match kind {
        0 => PotentialSpec::constant_offdiag(a, b),
        1 => PotentialSpec { p2: Channel::power(a, alpha), p3: Channel::constant(b), ..Default::default() },
        _ => PotentialSpec { p2: Channel::Polynomial { coeffs: vec![a, b] }, p3: Channel::power(b, alpha), ..Default::default() },
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minors_antisymmetric_and_plucker(seed in any::<u64>()) {
        let j = regular_bc(seed).minors().unwrap();
        for a in 1..=4 {
            for b in 1..=4 {
                prop_assert!((j.get(a, b) + j.get(b, a)).norm() < 1e-12);
            }
        }
        prop_assert!(j.plucker().norm() < 1e-12 * j.max_abs().powi(2).max(1.0));
    }

    #[test]
    fn classification_invariant_under_row_operations(seed in any::<u64>(), t in prop::array::uniform4(cplx(1.0))) {
        let m = Matrix2::new(t[0], t[1], t[2], t[3]);
        prop_assume!(m.det().norm() > 1e-2);
        for u in [regular_bc(seed), BoundaryMatrix::periodic(), BoundaryMatrix::separated()] {
            prop_assert_eq!(u.left_multiply(&m).unwrap().classify().unwrap().kind, u.classify().unwrap().kind);
        }
    }

    #[test]
    fn model_lattice_solves_delta0(seed in any::<u64>()) {
        let u = regular_bc(seed);
        let adj = u.adjoint().unwrap();
        let spec = u.unperturbed_spectrum().unwrap();
        let scale = u.minors().unwrap().max_abs();
        for n in -100..=100 {
            let l = spec.lambda0(n);
            let s = scale * (PI * l.im.abs()).exp();
            prop_assert!(u.delta0(l).unwrap().norm() < 1e-10 * s, "n = {}", n);
            prop_assert!(adj.delta0(l.conj()).unwrap().norm() < 1e-10 * s * adj.minors().unwrap().max_abs() / scale);
        }
    }

    #[test]
    fn model_eigenfunctions_normalized(seed in any::<u64>(), n in -30i64..30) {
        let u = regular_bc(seed);
        for y in u.model_eigenfunction(n).unwrap() {
            let m = 4000;
            let w = PI / m as f64;
            let norm2: f64 = (0..=m).map(|k| {
                let v = y.eval(k as f64 * w);
                let h = if k == 0 || k == m { w / 2.0 } else { w };
                (v[0].norm_sqr() + v[1].norm_sqr()) * h
            }).sum();
            prop_assert!((norm2 - 1.0).abs() < 1e-5);
            let (a, b) = y.boundary_values();
            let r = u.apply(a, b);
            prop_assert!(r[0].norm() < 1e-10 && r[1].norm() < 1e-10);
        }
    }

    #[test]
    fn liouville_and_cocycle(p in offdiag_potential(), l in strip_lambda(), xs in prop::array::uniform3(0.0..PI)) {
        let op = DiracOperator::new(BoundaryMatrix::separated(), p).unwrap();
        let e = |x: f64| fundamental_matrix(&op.mesh, l, x, false).unwrap().e;
        let (a, b, x) = (xs[0], xs[1], xs[2]);
        let s = (2.0 * l.im.abs() * PI).exp();
        prop_assert!((e(x).det() - 1.0).norm() < 1e-10 * s);
        let lhs = transfer_matrix(&e(a), &e(x)).unwrap() * transfer_matrix(&e(b), &e(a)).unwrap();
        let rhs = transfer_matrix(&e(b), &e(x)).unwrap();
        prop_assert!((lhs - rhs).max_abs() < 1e-9 * s);
    }

    #[test]
    fn delta_derivative_and_expansion(seed in any::<u64>(), p in offdiag_potential(), l in strip_lambda()) {
        let op = DiracOperator::new(regular_bc(seed), p).unwrap();
        let ev = char_det(&op, l).unwrap();
        prop_assert!((ev.delta - ev.m.det()).norm() <= 1e-14 * ev.m.max_abs().powi(2).max(1.0));
        let h = 1e-4;
        let fd = (delta(&op, l + h).unwrap() - delta(&op, l - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - ev.ddelta).norm() < 1e-6 * ev.ddelta.norm().max(1.0));
        prop_assert!((delta_expansion(&op, l).unwrap() - ev.delta).norm() < 1e-9 * ev.m.max_abs().powi(2).max(1.0));
    }

    #[test]
    fn green_adjoint_symmetry(seed in any::<u64>(), p in offdiag_potential(), l in strip_lambda(), t in 0.0..PI, x in 0.0..PI) {
        let op = DiracOperator::new(regular_bc(seed), p).unwrap();
        let g = match green_kernel(&op, l, t, x) {
            Err(DiracError::NearEigenvalue) => return Ok(()),
            r => r.unwrap(),
        };
        let h = green_kernel(&op.adjoint().unwrap(), l.conj(), x, t).unwrap();
        prop_assert!((h - g.conj_transpose()).max_abs() < 1e-8 * g.max_abs().max(1.0));
    }

    #[test]
    fn lagrange_identity(a in cplx(1.0), b in cplx(1.0), k in -3i64..3, q in prop::array::uniform4(cplx(1.0))) {
        // ⟨ℓ_P f, g⟩ - ⟨f, ℓ_{P*} g⟩ for smooth f, g with exact derivatives
        let p = Matrix2::new(q[0], q[1], q[2], q[3]);
        let ps = p.conj_transpose();
        let i = Complex64::i();
        let kf = k as f64 + 0.5;
        let f = |x: f64| [a * (i * kf * x).exp(), b * (-i * 2.0 * x).exp()];
        let df = |x: f64| [a * i * kf * (i * kf * x).exp(), -b * 2.0 * i * (-i * 2.0 * x).exp()];
        let g = |x: f64| [c64(1.0, x), c64(x.cos(), 0.0)];
        let dg = |x: f64| [c64(0.0, 1.0), c64(-x.sin(), 0.0)];
        let bd = |y: [Complex64; 2]| [-i * y[0], i * y[1]];
        let n = 20000;
        let h = PI / n as f64;
        let mut acc = c64(0.0, 0.0);
        for s in 0..=n {
            let x = s as f64 * h;
            let w = if s == 0 || s == n { h / 2.0 } else { h };
            let (fv, gv) = (f(x), g(x));
            let (pf, pg) = (p.mul_vec(fv), ps.mul_vec(gv));
            let (bf, bg) = (bd(df(x)), bd(dg(x)));
            let lf = [bf[0] + pf[0], bf[1] + pf[1]];
            let lg = [bg[0] + pg[0], bg[1] + pg[1]];
            acc += (lf[0] * gv[0].conj() + lf[1] * gv[1].conj() - fv[0] * lg[0].conj() - fv[1] * lg[1].conj()) * w;
        }
        let form = lagrange_boundary_form(f(0.0), f(PI), g(0.0), g(PI));
        prop_assert!((acc - form).norm() < 1e-6);
    }

    #[test]
    fn gauge_preserves_regularity(seed in any::<u64>(), c1 in cplx(1.0), c4 in cplx(1.0)) {
        let u = regular_bc(seed);
        let p = PotentialSpec { p1: Channel::constant(c1), p4: Channel::constant(c4), ..PotentialSpec::constant_offdiag(c64(1.0, 0.0), c64(0.5, 0.0)) };
        let g = gauge_reduce(&p, &u).unwrap();
        prop_assert!(g.bc.classify().unwrap().kind != BcKind::NonRegular);
        prop_assert!((g.gamma - (c1 + c4) / 2.0).norm() < 1e-12);
        prop_assert!(!g.potential.has_diagonal());
    }

    #[test]
    fn mesh_averages_integrate_exactly(p in offdiag_potential(), cells in 8usize..400) {
        let m = Mesh::build(&p, cells, 1e-8);
        for (c, ch) in [p.p2.clone(), p.p3.clone()].iter().enumerate() {
            let total: Complex64 = (0..m.cells()).map(|k| m.averages[k][c + 1] * m.width(k)).sum();
            let exact = ch.antiderivative(PI);
            prop_assert!((total - exact).norm() < 1e-12 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), p in offdiag_potential(), cells in 1usize..5000, nodes in prop::option::of(16usize..2048)) {
        let c = RunConfig {
            bc: if seed % 2 == 0 { BcSource::Matrix(regular_bc(seed)) } else { BcSource::Preset("preset:antiperiodic".into()) },
            potential: p,
            mesh_cells: cells,
            grid_nodes: nodes,
            ..RunConfig::default()
        };
        prop_assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn adjoint_spectrum_is_conjugate(seed in any::<u64>(), a in cplx(1.5), b in cplx(1.5)) {
        use dirac_spectral::spectrum::compute_spectrum;
        let op = DiracOperator::new(regular_bc(seed), PotentialSpec::constant_offdiag(a, b)).unwrap();
        let s = compute_spectrum(&op, -6, 6).unwrap();
        let t = compute_spectrum(&op.adjoint().unwrap(), -6, 6).unwrap();
        // indices are matched as sets: the Re-then-Im ordering flips under
        // conjugation only for ties in Re
        for r in &s {
            let d = t.iter().map(|q| (q.lambda - r.lambda.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-7, "λ = {}", r.lambda);
        }
    }
}
