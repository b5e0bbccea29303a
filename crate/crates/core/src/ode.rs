//! Adaptive Dormand–Prince 8(5,3) integrator for small fixed-size real systems.
//!
//! Coefficients are those of Hairer's `dop853`. The error estimate blends the
//! fifth- and third-order embedded solutions as in the reference code, and the
//! step controller is the usual `safety · err^(-1/8)` with bounded growth.

use crate::error::{Error, Result};

const STAGES: usize = 12;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

#[derive(Debug, Clone, Copy)]
pub struct Options<const N: usize> {
    pub rel_tol: f64,
    pub abs_tol: [f64; N],
    pub max_step: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1 > t0`.
///
/// `observe` runs after every accepted step and may abort the integration by
/// returning an error.
pub fn integrate<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &Options<N>,
    mut observe: O,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]) -> Result<()>,
{
    if !(t1 > t0) {
        return Err(Error::InvalidSettings(format!("integration interval [{t0}, {t1}] is empty")));
    }
    if !(opts.rel_tol > 0.0) || opts.abs_tol.iter().any(|&a| !(a >= 0.0)) {
        return Err(Error::InvalidSettings("tolerances must be positive".into()));
    }
    let mut t = t0;
    let mut y = y0;
    let mut f = rhs(t, &y);
    let mut h = initial_step(&mut rhs, t, &y, &f, opts).min(opts.max_step).min(t1 - t0);
    let mut k = [[0.0; N]; STAGES];
    // Kahan compensation of the state update. Small solutions that emerge from
    // large transients would otherwise drown in accumulated rounding.
    let mut carry = [0.0; N];
    let mut out = Outcome {
        t,
        y,
        accepted: 0,
        rejected: 0,
    };

    while t < t1 {
        if out.accepted + out.rejected >= opts.max_steps {
            return Err(Error::TooManySteps {
                t,
                max_steps: opts.max_steps,
            });
        }
        let min_step = 10.0 * (next_up(t) - t);
        let mut step_rejected = false;
        loop {
            if h < min_step {
                return Err(Error::StepUnderflow { t, step: h });
            }
            let mut t_new = t + h;
            if t_new >= t1 {
                t_new = t1;
            }
            let h_eff = t_new - t;

            k[0] = f;
            for s in 1..STAGES {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += h_eff * a * kj[i];
                        }
                    }
                }
                k[s] = rhs(t + C[s] * h_eff, &ys);
            }
            let mut dy = [0.0; N];
            for (s, ks) in k.iter().enumerate() {
                if B[s] != 0.0 {
                    for i in 0..N {
                        dy[i] += h_eff * B[s] * ks[i];
                    }
                }
            }
            let mut y_new = y;
            for i in 0..N {
                y_new[i] += dy[i];
            }

            let err = error_norm(&k, h_eff, &y, &y_new, opts);
            if err < 1.0 {
                let mut factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(ERROR_EXPONENT)).min(MAX_FACTOR)
                };
                if step_rejected {
                    factor = factor.min(1.0);
                }
                t = t_new;
                for i in 0..N {
                    let inc = dy[i] - carry[i];
                    let sum = y[i] + inc;
                    carry[i] = (sum - y[i]) - inc;
                    y[i] = sum;
                }
                f = rhs(t, &y);
                h = (h_eff * factor).min(opts.max_step);
                out.accepted += 1;
                break;
            }
            h = h_eff * (SAFETY * err.powf(ERROR_EXPONENT)).max(MIN_FACTOR);
            step_rejected = true;
            out.rejected += 1;
        }
        observe(t, &y)?;
    }
    out.t = t;
    out.y = y;
    Ok(out)
}

fn error_norm<const N: usize>(k: &[[f64; N]; STAGES], h: f64, y: &[f64; N], y_new: &[f64; N], opts: &Options<N>) -> f64 {
    let mut e5 = 0.0;
    let mut e3 = 0.0;
    for i in 0..N {
        let scale = opts.abs_tol[i] + y[i].abs().max(y_new[i].abs()) * opts.rel_tol;
        let mut s5 = 0.0;
        let mut s3 = 0.0;
        for s in 0..STAGES {
            s5 += E5[s] * k[s][i];
            s3 += E3[s] * k[s][i];
        }
        e5 += (s5 / scale).powi(2);
        e3 += (s3 / scale).powi(2);
    }
    if e5 == 0.0 && e3 == 0.0 {
        return 0.0;
    }
    let denom = e5 + 0.01 * e3;
    h.abs() * e5 / (denom * N as f64).sqrt()
}

fn initial_step<const N: usize, F>(rhs: &mut F, t0: f64, y0: &[f64; N], f0: &[f64; N], opts: &Options<N>) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let rms = |v: &dyn Fn(usize) -> f64| ((0..N).map(|i| v(i).powi(2)).sum::<f64>() / N as f64).sqrt();
    let scale: Vec<f64> = (0..N).map(|i| opts.abs_tol[i] + y0[i].abs() * opts.rel_tol).collect();
    let d0 = rms(&|i| y0[i] / scale[i]);
    let d1 = rms(&|i| f0[i] / scale[i]);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let mut y1 = *y0;
    for i in 0..N {
        y1[i] += h0 * f0[i];
    }
    let f1 = rhs(t0 + h0, &y1);
    let d2 = rms(&|i| (f1[i] - f0[i]) / scale[i]) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1)
}

fn next_up(t: f64) -> f64 {
    if t == 0.0 {
        return f64::from_bits(1);
    }
    let bits = t.to_bits();
    if t > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

const C: [f64; STAGES] = [
    0.0,
    0.526001519587677318785587544488e-01,
    0.789002279381515978178381316732e-01,
    0.118350341907227396726757197510,
    0.281649658092772603273242802490,
    0.333333333333333333333333333333,
    0.25,
    0.307692307692307692307692307692,
    0.651282051282051282051282051282,
    0.6,
    0.857142857142857142857142857142,
    1.0,
];

#[rustfmt::skip]
const A: [[f64; STAGES]; STAGES] = [
    [0.0; STAGES],
    [5.26001519587677318785587544488e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.95875854768068491816892993775e-2, 0.0, 8.87627564304205475450678981324e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.41365134159266685502369798665e-1, 0.0, -8.84549479328286085344864962717e-1, 9.24834003261792003115737966543e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.7037037037037037037037037037e-2, 0.0, 0.0, 1.70828608729473871279604482173e-1, 1.25467687566822425016691814123e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.7109375e-2, 0.0, 0.0, 1.70252211019544039314978060272e-1, 6.02165389804559606850219397283e-2, -1.7578125e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.70920001185047927108779319836e-2, 0.0, 0.0, 1.70383925712239993810214054705e-1, 1.07262030446373284651809199168e-1, -1.53194377486244017527936158236e-2, 8.27378916381402288758473766002e-3, 0.0, 0.0, 0.0, 0.0, 0.0],
    [6.24110958716075717114429577812e-1, 0.0, 0.0, -3.36089262944694129406857109825, -8.68219346841726006818189891453e-1, 2.75920996994467083049415600797e1, 2.01540675504778934086186788979e1, -4.34898841810699588477366255144e1, 0.0, 0.0, 0.0, 0.0],
    [4.77662536438264365890433908527e-1, 0.0, 0.0, -2.48811461997166764192642586468, -5.90290826836842996371446475743e-1, 2.12300514481811942347288949897e1, 1.52792336328824235832596922938e1, -3.32882109689848629194453265587e1, -2.03312017085086261358222928593e-2, 0.0, 0.0, 0.0],
    [-9.3714243008598732571704021658e-1, 0.0, 0.0, 5.18637242884406370830023853209, 1.09143734899672957818500254654, -8.14978701074692612513997267357, -1.85200656599969598641566180701e1, 2.27394870993505042818970056734e1, 2.49360555267965238987089396762, -3.0467644718982195003823669022, 0.0, 0.0],
    [2.27331014751653820792359768449, 0.0, 0.0, -1.05344954667372501984066689879e1, -2.00087205822486249909675718444, -1.79589318631187989172765950534e1, 2.79488845294199600508499808837e1, -2.85899827713502369474065508674, -8.87285693353062954433549289258, 1.23605671757943030647266201528e1, 6.43392746015763530355970484046e-1, 0.0],
];

const B: [f64; STAGES] = [
    5.42937341165687622380535766363e-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566,
    1.89151789931450038304281599044,
    -5.8012039600105847814672114227,
    3.1116436695781989440891606237e-1,
    -1.52160949662516078556178806805e-1,
    2.01365400804030348374776537501e-1,
    4.47106157277725905176885569043e-2,
];

/// Third-order error weights, `B - B̂₃`.
const E3: [f64; STAGES] = [
    5.42937341165687622380535766363e-2 - 0.244094488188976377952755905512,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566,
    1.89151789931450038304281599044,
    -5.8012039600105847814672114227,
    3.1116436695781989440891606237e-1 - 0.733846688281611857341361741547,
    -1.52160949662516078556178806805e-1,
    2.01365400804030348374776537501e-1,
    4.47106157277725905176885569043e-2 - 0.220588235294117647058823529412e-1,
];

const E5: [f64; STAGES] = [
    0.1312004499419488073250102996e-1,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753e+1,
    -0.4957589496572501915214079952,
    0.1664377182454986536961530415e+1,
    -0.3503288487499736816886487290,
    0.3341791187130174790297318841,
    0.8192320648511571246570742613e-1,
    -0.2235530786388629525884427845e-1,
];
