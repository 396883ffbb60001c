//! Moving-knife steps simulated with bounded communication.
//!
//! A step has devices `0..K`. Device 0 is the time knife, `x_0(t) = t`; every
//! later device `j` is computed by its controller from `t` and the values of
//! devices `0..j`. A trigger is a device whose zero marks an event. The
//! simulation never moves anything continuously. At a probe time `t` the
//! controllers announce their devices in order, each rounded to a dyadic
//! value fine enough that the rounding errors of earlier devices cannot add
//! up to more than the target accuracy. A binary search over time keeps two
//! times at which the trigger has opposite signs.
//!
//! [`austin`] runs the classic two-party perfect division procedure on top:
//! one player calls stop when the left piece is worth half to them, then
//! moves two knives so that the piece between them stays worth half to
//! them, until the other player also values it at half.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::comm::{Bits, Message, PublicCoins, Transcript};
use crate::error::{Error, Result};
use crate::protocols::Outcome;
use crate::rational::{ceil_log2_inv, floor_int, fmt_q, q, qi, qu, serde_q, serde_qvec, Q};
use crate::valuation::{DensityValuation, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviceKind {
    Knife,
    Trigger,
}

/// Computes a device value from the time and the earlier device values.
pub type Dependence<'a> = Box<dyn Fn(&Q, &[Q]) -> Q + 'a>;

pub struct Device<'a> {
    pub controller: usize,
    pub kind: DeviceKind,
    pub dependence: Dependence<'a>,
}

impl<'a> Device<'a> {
    /// The time knife every step starts with.
    pub fn time_knife() -> Self {
        Device {
            controller: 0,
            kind: DeviceKind::Knife,
            dependence: Box::new(|t, _| t.clone()),
        }
    }

    pub fn new(controller: usize, kind: DeviceKind, f: impl Fn(&Q, &[Q]) -> Q + 'a) -> Self {
        Device {
            controller,
            kind,
            dependence: Box::new(f),
        }
    }
}

/// One moving-knife step running from time `alpha` to `omega`.
pub struct Step<'a> {
    pub alpha: Q,
    pub omega: Q,
    pub devices: Vec<Device<'a>>,
    /// Lipschitz bound of every device in time and in earlier devices.
    pub zeta: Q,
}

impl<'a> Step<'a> {
    pub fn new(alpha: Q, omega: Q, devices: Vec<Device<'a>>, zeta: Q) -> Result<Self> {
        if alpha.is_negative() || alpha > omega || omega > Q::one() {
            return Err(Error::Precondition("need 0 <= alpha <= omega <= 1".into()));
        }
        if devices.is_empty() || devices[0].kind != DeviceKind::Knife {
            return Err(Error::Precondition("device 0 must be the time knife".into()));
        }
        if zeta < Q::one() {
            return Err(Error::Precondition("zeta must be at least 1".into()));
        }
        Ok(Step {
            alpha,
            omega,
            devices,
            zeta,
        })
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }
}

/// A time at which the trigger is within `eps` of zero, plus device values
/// within `eps` of the truth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonOutcome {
    /// Zero-based device index of the trigger.
    pub trigger_index: usize,
    #[serde(with = "serde_q")]
    pub time: Q,
    #[serde(with = "serde_qvec")]
    pub approx_values: Vec<Q>,
    /// Number of times at which devices were announced.
    pub probes: u32,
}

/// Exact device values at time `t`.
pub fn exact_device_values(step: &Step, t: &Q) -> Vec<Q> {
    let mut vals = Vec::with_capacity(step.len());
    for (j, d) in step.devices.iter().enumerate() {
        let v = if j == 0 { t.clone() } else { (d.dependence)(t, &vals) };
        vals.push(v);
    }
    vals
}

fn abs(x: &Q) -> Q {
    x.abs()
}

/// Checks the declared Lipschitz bound on `samples + 1` equally spaced times.
pub fn check_lipschitz(step: &Step, samples: u64) -> Result<()> {
    let width = &step.omega - &step.alpha;
    if width.is_zero() || samples == 0 {
        return Ok(());
    }
    let dt = &width / qu(samples);
    let mut prev = exact_device_values(step, &step.alpha);
    for k in 1..=samples {
        let t = &step.alpha + &dt * qu(k);
        let cur = exact_device_values(step, &t);
        for (j, (a, b)) in prev.iter().zip(&cur).enumerate() {
            if abs(&(a - b)) > &step.zeta * &dt {
                return Err(Error::Lipschitz(format!(
                    "device {j} moves {} over a time step of {} (zeta {})",
                    fmt_q(&abs(&(a - b))),
                    fmt_q(&dt),
                    fmt_q(&step.zeta)
                )));
            }
        }
        prev = cur;
    }
    Ok(())
}

/// Accuracy for device `j`: `eps / ((4ζ)^(K−1−j) · ⌈√(M^(K−1−j))⌉)`, `M = K + 1`.
fn cascade_precision(step: &Step, j: usize, eps: &Q) -> Q {
    let k = step.len();
    let e = (k - 1 - j) as u32;
    let m = BigInt::from(k as u64 + 1).pow(e);
    let mut root = m.sqrt();
    if &root * &root < m {
        root += 1;
    }
    eps / ((qi(4) * &step.zeta).pow(e as i32) * Q::from_integer(root))
}

fn push_signed(bits: &mut Bits, n: &BigInt) {
    bits.push(n.is_negative());
    let mag = n.magnitude();
    let len = mag.bits();
    bits.push_uint(len, 8);
    for i in (0..len).rev() {
        bits.push(mag.bit(i));
    }
}

fn read_signed(r: &mut crate::comm::BitReader<'_>) -> Result<BigInt> {
    let neg = r.read_bit()?;
    let len = r.read_uint(8)?;
    let mut mag = BigInt::zero();
    for _ in 0..len {
        mag = (mag << 1u32) + if r.read_bit()? { 1 } else { 0 };
    }
    Ok(if neg { -mag } else { mag })
}

/// Rounded knife positions are kept on the cake.
fn settle(kind: DeviceKind, v: Q) -> Q {
    match kind {
        DeviceKind::Knife => v.clamp(Q::zero(), Q::one()),
        DeviceKind::Trigger => v,
    }
}

/// Device values at time `t`, each within `eps` of the truth.
///
/// Device 0 is the public time. Every later device is announced by its
/// controller, rounded to a multiple of `2^-b` with `2^-b` at most its
/// cascade precision; runs of devices with the same controller share one
/// round.
pub fn approx_device_values(step: &Step, t: &Q, eps: &Q, tr: &mut Transcript) -> Result<Vec<Q>> {
    if *t < step.alpha || *t > step.omega {
        return Err(Error::Precondition(format!("time {} outside the step", fmt_q(t))));
    }
    if !eps.is_positive() {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    let mut vals = vec![t.clone()];
    let mut j = 1;
    while j < step.len() {
        let controller = step.devices[j].controller;
        let start = j;
        let mut bits = Bits::new();
        let mut local = vals.clone();
        let mut scales = Vec::new();
        while j < step.len() && step.devices[j].controller == controller {
            let b = ceil_log2_inv(&cascade_precision(step, j, eps)) + 1;
            let scale = Q::from_integer(BigInt::one() << b);
            let exact = (step.devices[j].dependence)(t, &local);
            let n = floor_int(&(&exact * &scale + q(1, 2)));
            push_signed(&mut bits, &n);
            local.push(settle(step.devices[j].kind, Q::from_integer(n) / &scale));
            scales.push(scale);
            j += 1;
        }
        tr.round_exchange(vec![Message::new(controller, bits)])?;
        let sent = &tr.rounds().last().expect("round just appended")[0].bits;
        let mut r = sent.reader();
        for (offset, scale) in scales.iter().enumerate() {
            let n = read_signed(&mut r)?;
            vals.push(settle(step.devices[start + offset].kind, Q::from_integer(n) / scale));
        }
        r.finish()?;
    }
    Ok(vals)
}

/// Largest number of probes [`find_epsilon_outcome`] may use:
/// `⌈log2(2ζ(ω − α)/eps)⌉ + 2`, and 2 for an empty time range.
pub fn probe_cap(step: &Step, eps: &Q) -> u32 {
    let width = &step.omega - &step.alpha;
    if width.is_zero() {
        return 2;
    }
    ceil_log2_inv(&(eps / (qi(2) * &step.zeta * width))) + 2
}

/// Binary search over time for an `eps`-outcome of `trigger`.
///
/// Devices are announced to within `eps/4`. A probe whose announced trigger
/// lies in `[−3eps/4, 3eps/4]` is returned at once; otherwise its sign is the
/// true sign and the half range with a sign change is kept. After
/// [`probe_cap`] probes the two ends are within `eps/(2ζ)` of each other
/// and the left end is returned.
pub fn find_epsilon_outcome(
    step: &Step,
    trigger: usize,
    eps: &Q,
    tr: &mut Transcript,
) -> Result<EpsilonOutcome> {
    if trigger == 0 || trigger >= step.len() || step.devices[trigger].kind != DeviceKind::Trigger {
        return Err(Error::Precondition(format!("device {trigger} is not a trigger")));
    }
    check_lipschitz(step, 16)?;
    let acc = eps / qi(4);
    let near = eps * q(3, 4);
    let cap = probe_cap(step, eps);
    let mut probes = 0u32;
    let mut probe = |t: &Q, tr: &mut Transcript| -> Result<Vec<Q>> {
        probes += 1;
        approx_device_values(step, t, &acc, tr)
    };
    let done = |t: &Q, vals: Vec<Q>, probes: u32| EpsilonOutcome {
        trigger_index: trigger,
        time: t.clone(),
        approx_values: vals,
        probes,
    };

    let (mut s, mut t) = (step.alpha.clone(), step.omega.clone());
    let vs = probe(&s, tr)?;
    if abs(&vs[trigger]) <= near {
        return Ok(done(&s, vs, 1));
    }
    let vt = probe(&t, tr)?;
    if abs(&vt[trigger]) <= near {
        return Ok(done(&t, vt, 2));
    }
    let s_positive = vs[trigger].is_positive();
    if s_positive == vt[trigger].is_positive() {
        return Err(Error::Precondition(format!(
            "trigger {trigger} keeps its sign over the step"
        )));
    }
    let mut vs = vs;
    let mut used = 2u32;
    while used < cap {
        let mid = (&s + &t) / qi(2);
        let vm = probe(&mid, tr)?;
        used += 1;
        if abs(&vm[trigger]) <= near {
            return Ok(done(&mid, vm, used));
        }
        if vm[trigger].is_positive() == s_positive {
            s = mid;
            vs = vm;
        } else {
            t = mid;
        }
    }
    Ok(done(&s, vs, used))
}

/// Checks both defining inequalities of an outcome in exact arithmetic.
pub fn verify_epsilon_outcome(step: &Step, out: &EpsilonOutcome, eps: &Q) -> bool {
    let exact = exact_device_values(step, &out.time);
    abs(&exact[out.trigger_index]) <= *eps
        && exact.len() == out.approx_values.len()
        && exact
            .iter()
            .zip(&out.approx_values)
            .all(|(a, b)| abs(&(a - b)) <= *eps)
}

/// Phase one: the knife moves right until `v([0,t]) = 1/2` for `player`.
pub fn austin_phase1_step(player: usize, v: &DensityValuation) -> Result<Step<'_>> {
    let zeta = v.max_density().max(Q::one()) * q(3, 2);
    Step::new(
        Q::zero(),
        Q::one(),
        vec![
            Device::time_knife(),
            Device::new(player, DeviceKind::Trigger, move |_, x| v.prefix(&x[0]) - q(1, 2)),
        ],
        zeta,
    )
}

/// The caller's right knife: keeps `[s, R(s)]` worth half to the caller,
/// or sits at 1 once less than half remains.
fn right_knife(vc: &DensityValuation, s: &Q) -> Q {
    let rest = Q::one() - vc.prefix(s);
    let want = rest.min(q(1, 2));
    vc.cut(s, &want).expect("at most the remaining value")
}

/// Lipschitz bound for phase two on valuations with densities in `[h, D]`.
pub fn austin_zeta(d: &Q, h: &Q) -> Q {
    let d = d.clone().max(Q::one());
    let ratio = &d / h;
    let candidates = [Q::one(), &d * q(3, 2), ratio.clone(), &d * (Q::one() + &ratio)];
    candidates.into_iter().max().expect("nonempty")
}

/// Phase two over left-knife positions `[0, omega]`.
pub fn austin_phase2_step<'a>(
    caller: usize,
    other: usize,
    vc: &'a DensityValuation,
    vo: &'a DensityValuation,
    omega: Q,
) -> Result<Step<'a>> {
    let d = vc.max_density().max(vo.max_density());
    let h = vc.min_density().min(vo.min_density());
    if !h.is_positive() {
        return Err(Error::Precondition("phase two needs hungry valuations".into()));
    }
    Step::new(
        Q::zero(),
        omega,
        vec![
            Device::time_knife(),
            Device::new(caller, DeviceKind::Knife, move |_, x| right_knife(vc, &x[0])),
            Device::new(other, DeviceKind::Trigger, move |_, x| {
                vo.prefix(&x[1]) - vo.prefix(&x[0]) - q(1, 2)
            }),
        ],
        austin_zeta(&d, &h),
    )
}

/// Everything needed to re-check an [`austin`] run.
#[derive(Clone, Debug)]
pub struct AustinTrace {
    /// The hungry valuations the knives ran on.
    pub hungry: [DensityValuation; 2],
    pub caller: usize,
    /// Phase-one outcomes in order, with the player each belongs to.
    pub phase1: Vec<(usize, EpsilonOutcome)>,
    pub phase1_eps: Q,
    pub phase2: EpsilonOutcome,
    pub phase2_omega: Q,
    pub phase2_eps: Q,
}

/// Two-cut perfect division: the middle piece is worth `1/2 ± eps` to both.
pub fn austin(
    va: &DensityValuation,
    vb: &DensityValuation,
    eps: &Q,
    coins: &mut PublicCoins,
) -> Result<(Outcome, AustinTrace)> {
    crate::protocols::check_eps(eps)?;
    // Mixing in eps/4 of uniform moves every piece by at most eps/4.
    let hungry = [va.make_hungry(&(eps / qi(2)))?, vb.make_hungry(&(eps / qi(2)))?];
    let d = hungry[0].max_density().max(hungry[1].max_density()).max(Q::one());
    let h = hungry[0].min_density().min(hungry[1].min_density());
    let eps2 = eps / qi(2);
    let eps1 = &eps2 * &h / (qi(8) * &d);
    let mut tr = Transcript::new();

    let step0 = austin_phase1_step(0, &hungry[0])?;
    let out0 = find_epsilon_outcome(&step0, 1, &eps1, &mut tr)?;
    let mut phase1 = vec![(0usize, out0.clone())];
    // Player 1 says whether the left piece already exceeded half for them.
    let earlier = hungry[1].prefix(&out0.time) > q(1, 2);
    tr.say(1, Bits::from(vec![earlier]))?;
    let sent = tr.rounds().last().expect("round just appended")[0].bits.clone();
    let earlier = sent.reader().read_bit()?;
    let (caller, omega) = if earlier {
        let step1 = austin_phase1_step(1, &hungry[1])?;
        let out1 = find_epsilon_outcome(&step1, 1, &eps1, &mut tr)?;
        let t = out1.time.clone();
        phase1.push((1, out1));
        (1usize, t)
    } else {
        (0usize, out0.time.clone())
    };
    let other = 1 - caller;

    let step2 = austin_phase2_step(caller, other, &hungry[caller], &hungry[other], omega.clone())?;
    let out2 = find_epsilon_outcome(&step2, 2, &eps2, &mut tr)?;
    let left = out2.time.clone();
    let right = out2.approx_values[1].clone().clamp(left.clone(), Q::one());
    let middle = coins.draw_below(2) as usize;
    let alloc = Allocation::new(vec![left, right], vec![1 - middle, middle, 1 - middle])?;
    let trace = AustinTrace {
        hungry: hungry.clone(),
        caller,
        phase1,
        phase1_eps: eps1,
        phase2: out2,
        phase2_omega: omega,
        phase2_eps: eps2,
    };
    Ok((Outcome::new(alloc, tr), trace))
}
