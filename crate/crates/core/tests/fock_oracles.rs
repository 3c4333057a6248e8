mod common;

use approx::assert_abs_diff_eq;
use cvsteer::fock::{
    coherent_state, displacement_operator, marginal, parity_projector, probability, projector_tail,
    read_state_file, state_from_json, state_to_json, truncation_tail, write_state_file,
    DenseOperator, FockVector, MultiModeState, ParitySetting, C64,
};
use cvsteer::oracles::{analytic_even_parity_prob, analytic_odd_parity_prob};
use cvsteer::Error;

use common::{coherent_parity_series, displacement_by_expm, displacement_element};

fn max_abs_diff(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn laguerre_elements_match_recurrence() {
    for &beta in &[-1.7, -0.3, 0.5, 1.0, 2.4] {
        let d = displacement_operator(beta, 64).unwrap();
        let mut worst: f64 = 0.0;
        for m in 0..32 {
            for n in 0..32 {
                let z = d.matrix()[(m, n)];
                worst = worst.max((z.re - displacement_element(m, n, beta)).abs());
                worst = worst.max(z.im.abs());
            }
        }
        assert!(worst < 1e-10, "beta {beta}: {worst:e}");
    }
}

#[test]
fn matrix_exponential_agrees_on_low_block() {
    let dim = 96;
    for &beta in &[0.5, -1.2, 2.0] {
        let d = displacement_operator(beta, dim).unwrap();
        let e = displacement_by_expm(beta, dim);
        let mut worst: f64 = 0.0;
        for m in 0..dim / 2 {
            for n in 0..dim / 2 {
                worst = worst.max((d.matrix()[(m, n)].re - e[(m, n)]).abs());
            }
        }
        assert!(worst < 1e-9, "beta {beta}: {worst:e}");
    }
}

#[test]
fn vacuum_overlap_example() {
    let d = displacement_operator(0.5, 32).unwrap();
    assert_abs_diff_eq!(d.matrix()[(0, 0)].re, (-0.125f64).exp(), epsilon = 1e-14);
    assert_abs_diff_eq!(
        displacement_element(0, 0, 0.5),
        0.8824969025845955,
        epsilon = 1e-14
    );
    let e = displacement_by_expm(0.5, 64);
    assert_abs_diff_eq!(e[(0, 0)], (-0.125f64).exp(), epsilon = 1e-12);
}

#[test]
fn displacement_inverse_on_low_block() {
    for &beta in &[0.3, 1.0, 2.5] {
        let dim = 64;
        let tail = truncation_tail(beta, dim).unwrap();
        let p = displacement_operator(beta, dim).unwrap();
        let m = displacement_operator(-beta, dim).unwrap();
        let prod = p.matrix() * m.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..dim / 2 {
            for j in 0..dim / 2 {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - C64::new(id, 0.0)).norm());
            }
        }
        assert!(
            worst <= 10.0 * tail + 1e-14,
            "beta {beta}: {worst:e} vs tail {tail:e}"
        );
    }
}

#[test]
fn projectors_complete_and_idempotent() {
    for &beta in &[-2.0, -0.4, 0.0, 0.9, 2.2] {
        let dim = 72;
        let tail = projector_tail(beta, dim).unwrap();
        assert_eq!(
            parity_projector(ParitySetting::even(beta).unwrap(), dim)
                .unwrap()
                .tail(),
            tail
        );
        let even = parity_projector(ParitySetting::even(beta).unwrap(), dim).unwrap();
        let odd = parity_projector(ParitySetting::odd(beta).unwrap(), dim).unwrap();
        let sum = even.matrix() + odd.matrix();
        let id = DenseOperator::identity(dim).unwrap();
        let completeness = max_abs_diff(
            sum.iter().map(|z| z.norm()),
            id.matrix().iter().map(|z| z.norm()),
        );
        assert!(completeness <= 1e-12);
        for p in [&even, &odd] {
            assert!(p.is_hermitian(1e-12));
            let sq = p.matrix() * p.matrix();
            let half = dim / 2;
            let dev = (sq - p.matrix())
                .view((0, 0), (half, half))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(
                dev <= 10.0 * tail + 1e-14,
                "beta {beta}: {dev:e} vs {tail:e}"
            );
        }
    }
}

#[test]
fn undisplaced_even_projector_is_diagonal() {
    let p = parity_projector(ParitySetting::even(0.0).unwrap(), 6).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let want = if i == j && i % 2 == 0 { 1.0 } else { 0.0 };
            assert_eq!(p.matrix()[(i, j)], C64::new(want, 0.0));
        }
    }
}

#[test]
fn coherent_state_examples() {
    let vac = coherent_state(0.0, 16).unwrap();
    assert_eq!(vac.amps()[0], C64::new(1.0, 0.0));
    assert!(vac.amps().iter().skip(1).all(|z| *z == C64::new(0.0, 0.0)));
    let one = coherent_state(1.0, 32).unwrap();
    assert_abs_diff_eq!(one.amps()[0].re, 0.6065306597126334, epsilon = 1e-12);
    assert!(matches!(
        coherent_state(2.0, 8),
        Err(Error::Truncation { .. })
    ));
    // brute-force Poisson(4) tail beyond n = 7
    let mut p = (-4.0f64).exp();
    let mut head = p;
    for k in 1..8 {
        p *= 4.0 / k as f64;
        head += p;
    }
    assert!(1.0 - head > 1e-10);
}

#[test]
fn displaced_vacuum_is_coherent() {
    for &beta in &[-2.0, 0.7, 1.0, 1.8] {
        let dim = 64;
        let d = displacement_operator(beta, dim).unwrap();
        let c = coherent_state(beta, dim).unwrap();
        let diff = max_abs_diff(
            d.matrix().column(0).iter().map(|z| z.re),
            c.amps().iter().map(|z| z.re),
        );
        assert!(diff < 1e-10, "beta {beta}: {diff:e}");
    }
}

#[test]
fn coherent_parity_matches_series_and_closed_form() {
    let dim = cvsteer::fock::auto_dim(3.0, 3.0);
    for &(g, b) in &[(1.2, 0.7), (-2.5, 1.0), (3.0, -3.0), (0.0, 0.4)] {
        let s = MultiModeState::single(coherent_state(g, dim).unwrap());
        let pe = parity_projector(ParitySetting::even(b).unwrap(), dim).unwrap();
        let po = parity_projector(ParitySetting::odd(b).unwrap(), dim).unwrap();
        let even = probability(&s, &[Some(&pe)]).unwrap();
        let odd = probability(&s, &[Some(&po)]).unwrap();
        assert_abs_diff_eq!(even, coherent_parity_series(g, b, 0), epsilon = 1e-10);
        assert_abs_diff_eq!(odd, coherent_parity_series(g, b, 1), epsilon = 1e-10);
        assert_abs_diff_eq!(even, analytic_even_parity_prob(g, b), epsilon = 1e-10);
        assert_abs_diff_eq!(odd, analytic_odd_parity_prob(g, b), epsilon = 1e-10);
    }
}

#[test]
fn product_states_factorize() {
    let dim = 48;
    let a = coherent_state(1.3, dim).unwrap();
    let b = coherent_state(-0.8, dim).unwrap();
    let s = MultiModeState::product(&[a.clone(), b.clone()]).unwrap();
    let pa = parity_projector(ParitySetting::odd(0.4).unwrap(), dim).unwrap();
    let pb = parity_projector(ParitySetting::even(-1.1).unwrap(), dim).unwrap();
    let joint = probability(&s, &[Some(&pa), Some(&pb)]).unwrap();
    let single = |v: &FockVector, p: &DenseOperator| v.expectation(p).unwrap().re;
    assert_abs_diff_eq!(joint, single(&a, &pa) * single(&b, &pb), epsilon = 1e-10);

    let vac = MultiModeState::product(&[
        FockVector::basis(0, 8).unwrap(),
        FockVector::basis(0, 8).unwrap(),
    ])
    .unwrap();
    let p0 = parity_projector(ParitySetting::even(0.0).unwrap(), 8).unwrap();
    assert_abs_diff_eq!(
        probability(&vac, &[Some(&p0), Some(&p0)]).unwrap(),
        1.0,
        epsilon = 1e-14
    );
}

#[test]
fn marginal_of_product_is_pure_factor() {
    let dim = 40;
    let a = coherent_state(1.1, dim).unwrap();
    let s = MultiModeState::product(&[a.clone(), coherent_state(0.6, dim).unwrap()]).unwrap();
    let m = marginal(&s, &[0]).unwrap();
    let rho = m.density_matrix();
    let want = a.amps() * a.amps().adjoint();
    let diff = (rho.clone() - want)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(diff < 1e-12);
    assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
}

#[test]
fn state_file_round_trip() {
    let dim = 24;
    let s = MultiModeState::product(&[
        coherent_state(0.9, dim).unwrap(),
        coherent_state(-1.2, dim).unwrap(),
    ])
    .unwrap();
    let text = state_to_json(&s);
    let back = state_from_json(&text).unwrap();
    assert_eq!(state_to_json(&back), text);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    write_state_file(&path, &s).unwrap();
    let read = read_state_file(&path).unwrap().unwrap();
    assert_eq!(read.dims(), s.dims());
    assert_eq!(state_to_json(&read), text);

    assert!(state_from_json(&text[..text.len() / 2]).is_err());
}
