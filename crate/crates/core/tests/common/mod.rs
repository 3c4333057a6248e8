//! Independent reference implementations. None of these share code paths
//! with the library: displacement elements come from the associated-Laguerre
//! closed form or a matrix exponential, and N00N statistics are summed
//! directly over Fock indices.
#![allow(dead_code)]

use nalgebra::DMatrix;

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by the three-term recurrence.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let (mut prev, mut cur) = (1.0, 1.0 + k - x);
    if n == 0 {
        return prev;
    }
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `⟨m|D(β)|n⟩` for real `β` from the closed form
/// `√(n!/m!) e^{−β²/2} β^{m−n} L_n^{(m−n)}(β²)` (and its transpose partner).
pub fn displacement_element(m: usize, n: usize, beta: f64) -> f64 {
    let x = beta * beta;
    let (lo, hi, base) = if m >= n { (n, m, beta) } else { (m, n, -beta) };
    let power = hi - lo;
    if power > 0 && base == 0.0 {
        return 0.0;
    }
    let ln_base = if power > 0 {
        power as f64 * base.abs().ln()
    } else {
        0.0
    };
    let sign = if base < 0.0 && power % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    let mag = (0.5 * (ln_factorial(lo) - ln_factorial(hi)) - 0.5 * x + ln_base).exp();
    sign * mag * laguerre(lo, power, x)
}

/// `exp(A)` by scaling and squaring with a degree-24 Taylor core.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = a.iter().map(|x| x.abs()).fold(0.0, f64::max) * a.nrows() as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s);
    let n = a.nrows();
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `D(β) = exp(β(a† − a))` on `dim` levels via [`expm`].
pub fn displacement_by_expm(beta: f64, dim: usize) -> DMatrix<f64> {
    let mut gen = DMatrix::<f64>::zeros(dim, dim);
    for n in 1..dim {
        let s = (n as f64).sqrt();
        gen[(n, n - 1)] = beta * s;
        gen[(n - 1, n)] = -beta * s;
    }
    expm(&gen)
}

/// Index cutoff for the brute-force sums.
pub const BRUTE_CUTOFF: usize = 160;

/// `Tr[ρ (Π^a(α) ⊗ Π^b(β))]` for `(|N,0⟩ − |0,N⟩)/√2`, as
/// `Σ_{m∈a, k∈b} |⟨m,k| D(α)† ⊗ D(β)† |ψ⟩|²` with `⟨m|D(α)†|n⟩ = d_{mn}(−α)`.
/// `a` and `b` are 0 for even, 1 for odd.
pub fn noon_joint_brute(n: usize, a: usize, alpha: f64, b: usize, beta: f64) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    for m in (a..BRUTE_CUTOFF).step_by(2) {
        let dm_n = displacement_element(m, n, -alpha);
        let dm_0 = displacement_element(m, 0, -alpha);
        for k in (b..BRUTE_CUTOFF).step_by(2) {
            let c = h
                * (dm_n * displacement_element(k, 0, -beta)
                    - dm_0 * displacement_element(k, n, -beta));
            total += c * c;
        }
    }
    total
}

/// Alice's marginal `Tr[ρ (Π^a(α) ⊗ I)]` for the same state.
pub fn noon_alice_brute(n: usize, a: usize, alpha: f64) -> f64 {
    noon_joint_brute(n, a, alpha, 0, 0.0) + noon_joint_brute(n, a, alpha, 1, 0.0)
}

/// Paired-setting steering functional of the N00N state, brute force.
pub fn noon_functional_brute(n: usize, a: usize, alpha: f64, b: usize, beta: f64) -> f64 {
    let c1 = noon_joint_brute(n, a, alpha, b, beta) / noon_alice_brute(n, a, alpha);
    let c2 = noon_joint_brute(n, a, -alpha, b, -beta) / noon_alice_brute(n, a, -alpha);
    0.5 * (c1 + c2)
}

/// `⟨γ|Π^p(β)|γ⟩` by summing the Poisson weights of `|γ − β⟩` over one parity class.
pub fn coherent_parity_series(gamma: f64, beta: f64, parity: usize) -> f64 {
    let mu = (gamma - beta).powi(2);
    let mut p = (-mu).exp();
    let mut total = if parity == 0 { p } else { 0.0 };
    for k in 1..400 {
        p *= mu / k as f64;
        if k % 2 == parity {
            total += p;
        }
    }
    total
}
