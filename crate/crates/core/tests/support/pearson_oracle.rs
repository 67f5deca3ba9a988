//! High-precision Pearson oracle built on `astro-float`.
//!
//! Shares nothing with the library: sums are accumulated in 512-bit floats,
//! `B(a, 1/2)` is built by exact recurrence from `B(1, 1/2) = 2` or
//! `B(1/2, 1/2) = π`, and the incomplete beta integral is summed as a power
//! series (directly for `x ≤ 0.9`, through the complement otherwise).

use astro_float::{BigFloat, Consts, RoundingMode};

const P: usize = 512;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct OracleResult {
    pub r: f64,
    pub ln_p: f64,
}

fn bf(v: f64) -> BigFloat {
    BigFloat::from_f64(v, P)
}

fn to_f64(v: &BigFloat, cc: &mut Consts) -> f64 {
    let s = v
        .format(astro_float::Radix::Dec, RM, cc)
        .expect("finite value formats");
    s.parse::<f64>()
        .unwrap_or_else(|_| panic!("cannot parse oracle output {s:?}"))
}

fn ln_beta_half(a: &BigFloat, cc: &mut Consts) -> BigFloat {
    // a is a positive multiple of 1/2
    let half = bf(0.5);
    let one = bf(1.0);
    let twice = to_f64(&a.mul(&bf(2.0), P, RM), cc).round() as u64;
    let (mut cur_a, mut beta) = if twice % 2 == 0 {
        (bf(1.0), bf(2.0))
    } else {
        (bf(0.5), cc.pi(P, RM))
    };
    while cur_a.cmp(a).expect("comparable") < 0 {
        // B(s+1, 1/2) = B(s, 1/2) · s / (s + 1/2)
        beta = beta.mul(&cur_a, P, RM).div(&cur_a.add(&half, P, RM), P, RM);
        cur_a = cur_a.add(&one, P, RM);
    }
    beta.ln(P, RM, cc)
}

pub fn pearson_oracle(x: &[f64], y: &[f64]) -> OracleResult {
    let mut cc = Consts::new().expect("constants cache");
    let n = x.len();
    let nb = bf(n as f64);
    let sum = |v: &[f64]| v.iter().fold(bf(0.0), |acc, e| acc.add(&bf(*e), P, RM));
    let mx = sum(x).div(&nb, P, RM);
    let my = sum(y).div(&nb, P, RM);
    let (mut sxx, mut syy, mut sxy) = (bf(0.0), bf(0.0), bf(0.0));
    for (a, b) in x.iter().zip(y) {
        let dx = bf(*a).sub(&mx, P, RM);
        let dy = bf(*b).sub(&my, P, RM);
        sxx = sxx.add(&dx.mul(&dx, P, RM), P, RM);
        syy = syy.add(&dy.mul(&dy, P, RM), P, RM);
        sxy = sxy.add(&dx.mul(&dy, P, RM), P, RM);
    }
    let r2 = sxy.mul(&sxy, P, RM).div(&sxx.mul(&syy, P, RM), P, RM);
    let mut r = r2.sqrt(P, RM);
    if sxy.is_negative() {
        r.inv_sign();
    }
    let one = bf(1.0);
    let xa = one.sub(&r2, P, RM);
    let a = bf((n as f64 - 2.0) / 2.0);
    let ln_b = ln_beta_half(&a, &mut cc);
    let eps = bf(2f64.powi(-500));

    let ln_p = if to_f64(&xa, &mut cc) <= 0.9 {
        // ∫_0^x u^{a-1} (1-u)^{-1/2} du = Σ (1/2)_k/k! · x^{a+k}/(a+k)
        let x_pow_a = a.mul(&xa.ln(P, RM, &mut cc), P, RM).exp(P, RM, &mut cc);
        let mut coef = bf(1.0); // (1/2)_k / k!
        let mut xk = bf(1.0);
        let mut total = bf(0.0);
        let mut k = 0u64;
        loop {
            let kf = bf(k as f64);
            let term = coef.mul(&xk, P, RM).div(&a.add(&kf, P, RM), P, RM);
            total = total.add(&term, P, RM);
            if term.div(&total, P, RM).cmp(&eps).expect("comparable") < 0 {
                break;
            }
            coef = coef
                .mul(&kf.add(&bf(0.5), P, RM), P, RM)
                .div(&kf.add(&one, P, RM), P, RM);
            xk = xk.mul(&xa, P, RM);
            k += 1;
        }
        x_pow_a
            .mul(&total, P, RM)
            .ln(P, RM, &mut cc)
            .sub(&ln_b, P, RM)
    } else {
        // 1 − I_x(a, 1/2) = I_{r²}(1/2, a) = (1/B) Σ (1−a)_k/k! · r^{2k+1}/(k+1/2)
        let r_abs = r2.sqrt(P, RM);
        let mut coef = bf(1.0);
        let mut pow = r_abs.clone();
        let mut total = bf(0.0);
        let mut k = 0u64;
        loop {
            let kf = bf(k as f64);
            let term = coef.mul(&pow, P, RM).div(&kf.add(&bf(0.5), P, RM), P, RM);
            total = total.add(&term, P, RM);
            let mut mag = term.clone();
            mag.set_sign(astro_float::Sign::Pos);
            if k > 2 * n as u64 && mag.cmp(&eps).expect("comparable") < 0 {
                break;
            }
            if coef.is_zero() {
                break;
            }
            // (1−a)_{k+1}/(k+1)! = (1−a)_k/k! · (1−a+k)/(k+1)
            coef = coef.mul(&one.sub(&a, P, RM).add(&kf, P, RM), P, RM).div(
                &kf.add(&one, P, RM),
                P,
                RM,
            );
            pow = pow.mul(&r2, P, RM);
            k += 1;
        }
        let q = total.div(&ln_b.exp(P, RM, &mut cc), P, RM);
        one.sub(&q, P, RM).ln(P, RM, &mut cc)
    };

    OracleResult {
        r: to_f64(&r, &mut cc),
        ln_p: to_f64(&ln_p, &mut cc),
    }
}
