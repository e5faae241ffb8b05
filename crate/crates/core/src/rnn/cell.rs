//! Per-timestep equations of every node type, forward and backward.
//!
//! Every unit receives one scalar input sum `s` (the weighted edges into the
//! node) and its own output from the previous timestep `h_prev`. Parameter
//! layouts, with `w` the input weight, `u` the recurrent weight and `b` the
//! bias of each gate:
//!
//! | unit     | params                                              |
//! |----------|-----------------------------------------------------|
//! | identity | `b`                                                 |
//! | tanh     | `b`                                                 |
//! | LSTM     | `wi ui bi  wf uf bf  wo uo bo  wg ug bg`            |
//! | GRU      | `wz uz bz  wr ur br  wh uh bh`                      |
//! | MGU      | `wf uf bf  wh uh bh`                                |
//!
//! ```text
//! LSTM  i = σ(wi·s + ui·h' + bi)   f = σ(..)   o = σ(..)   g = tanh(..)
//!       c = f·c' + i·g              h = o·tanh(c)
//! GRU   z = σ(wz·s + uz·h' + bz)   r = σ(..)
//!       ĥ = tanh(wh·s + uh·(r·h') + bh)         h = (1-z)·h' + z·ĥ
//! MGU   f = σ(wf·s + uf·h' + bf)
//!       ĥ = tanh(wh·s + uh·(f·h') + bh)         h = (1-f)·h' + f·ĥ
//! ```

use super::{CellKind, NodeKind};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Unit {
    Identity,
    Tanh,
    Lstm,
    Gru,
    Mgu,
}

impl Unit {
    pub(crate) fn of(kind: NodeKind, cell: CellKind) -> Option<Unit> {
        match (kind, cell) {
            (NodeKind::Input, _) => None,
            (NodeKind::Output, _) => Some(Unit::Identity),
            (NodeKind::Hidden, CellKind::Simple) => Some(Unit::Tanh),
            (NodeKind::Hidden, CellKind::Lstm) => Some(Unit::Lstm),
            (NodeKind::Hidden, CellKind::Gru) => Some(Unit::Gru),
            (NodeKind::Hidden, CellKind::Mgu) => Some(Unit::Mgu),
        }
    }

    /// Values kept per timestep for the backward pass; slot 0 is always `s`.
    pub(crate) fn cache_width(self) -> usize {
        match self {
            Unit::Identity | Unit::Tanh => 1,
            Unit::Lstm => 7,
            Unit::Gru => 4,
            Unit::Mgu => 3,
        }
    }

    /// Internal cell state carried alongside `h` (only the LSTM has one).
    pub(crate) fn prev_cell_state(self, prev_cache: Option<&[f64]>) -> f64 {
        match (self, prev_cache) {
            (Unit::Lstm, Some(c)) => c[5],
            _ => 0.0,
        }
    }

    /// Computes `h` and fills `cache`.
    pub(crate) fn forward(self, p: &[f64], s: f64, h_prev: f64, c_prev: f64, cache: &mut [f64]) -> f64 {
        cache[0] = s;
        match self {
            Unit::Identity => s + p[0],
            Unit::Tanh => (s + p[0]).tanh(),
            Unit::Lstm => {
                let i = sigmoid(p[0] * s + p[1] * h_prev + p[2]);
                let f = sigmoid(p[3] * s + p[4] * h_prev + p[5]);
                let o = sigmoid(p[6] * s + p[7] * h_prev + p[8]);
                let g = (p[9] * s + p[10] * h_prev + p[11]).tanh();
                let c = f * c_prev + i * g;
                let tc = c.tanh();
                cache[1..7].copy_from_slice(&[i, f, o, g, c, tc]);
                o * tc
            }
            Unit::Gru => {
                let z = sigmoid(p[0] * s + p[1] * h_prev + p[2]);
                let r = sigmoid(p[3] * s + p[4] * h_prev + p[5]);
                let hh = (p[6] * s + p[7] * (r * h_prev) + p[8]).tanh();
                cache[1..4].copy_from_slice(&[z, r, hh]);
                (1.0 - z) * h_prev + z * hh
            }
            Unit::Mgu => {
                let f = sigmoid(p[0] * s + p[1] * h_prev + p[2]);
                let hh = (p[3] * s + p[4] * (f * h_prev) + p[5]).tanh();
                cache[1..3].copy_from_slice(&[f, hh]);
                (1.0 - f) * h_prev + f * hh
            }
        }
    }

    /// Back-propagates `dh` (gradient on this step's output) and `dc`
    /// (gradient on this step's LSTM cell state from the next step).
    /// Accumulates parameter gradients into `dp` and returns
    /// `(d s, d h_prev, d c_prev)`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn backward(
        self,
        p: &[f64],
        cache: &[f64],
        h: f64,
        h_prev: f64,
        c_prev: f64,
        dh: f64,
        dc: f64,
        dp: &mut [f64],
    ) -> (f64, f64, f64) {
        let s = cache[0];
        match self {
            Unit::Identity => {
                dp[0] += dh;
                (dh, 0.0, 0.0)
            }
            Unit::Tanh => {
                let da = dh * (1.0 - h * h);
                dp[0] += da;
                (da, 0.0, 0.0)
            }
            Unit::Lstm => {
                let [i, f, o, g, _c, tc] = [cache[1], cache[2], cache[3], cache[4], cache[5], cache[6]];
                let d_o = dh * tc;
                let dc = dh * o * (1.0 - tc * tc) + dc;
                let d_i = dc * g;
                let d_g = dc * i;
                let d_f = dc * c_prev;
                let dc_prev = dc * f;
                let pre = [
                    d_i * i * (1.0 - i),
                    d_f * f * (1.0 - f),
                    d_o * o * (1.0 - o),
                    d_g * (1.0 - g * g),
                ];
                let (mut ds, mut dh_prev) = (0.0, 0.0);
                for (k, da) in pre.into_iter().enumerate() {
                    let j = 3 * k;
                    dp[j] += da * s;
                    dp[j + 1] += da * h_prev;
                    dp[j + 2] += da;
                    ds += p[j] * da;
                    dh_prev += p[j + 1] * da;
                }
                (ds, dh_prev, dc_prev)
            }
            Unit::Gru => {
                let [z, r, hh] = [cache[1], cache[2], cache[3]];
                let dz = dh * (hh - h_prev);
                let dah = dh * z * (1.0 - hh * hh);
                let mut dh_prev = dh * (1.0 - z);

                dp[6] += dah * s;
                dp[7] += dah * r * h_prev;
                dp[8] += dah;
                let mut ds = p[6] * dah;
                let dr = p[7] * dah * h_prev;
                dh_prev += p[7] * dah * r;

                let daz = dz * z * (1.0 - z);
                dp[0] += daz * s;
                dp[1] += daz * h_prev;
                dp[2] += daz;
                ds += p[0] * daz;
                dh_prev += p[1] * daz;

                let dar = dr * r * (1.0 - r);
                dp[3] += dar * s;
                dp[4] += dar * h_prev;
                dp[5] += dar;
                ds += p[3] * dar;
                dh_prev += p[4] * dar;

                (ds, dh_prev, 0.0)
            }
            Unit::Mgu => {
                let [f, hh] = [cache[1], cache[2]];
                let dah = dh * f * (1.0 - hh * hh);
                let mut dh_prev = dh * (1.0 - f);

                dp[3] += dah * s;
                dp[4] += dah * f * h_prev;
                dp[5] += dah;
                let mut ds = p[3] * dah;
                dh_prev += p[4] * dah * f;

                let df = dh * (hh - h_prev) + p[4] * dah * h_prev;
                let daf = df * f * (1.0 - f);
                dp[0] += daf * s;
                dp[1] += daf * h_prev;
                dp[2] += daf;
                ds += p[0] * daf;
                dh_prev += p[1] * daf;

                (ds, dh_prev, 0.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Runs a single unit over a scalar input sequence with loss Σ h_t² / 2.
    fn unit_loss(unit: Unit, p: &[f64], xs: &[f64]) -> f64 {
        let w = unit.cache_width();
        let mut cache = vec![0.0; w * xs.len()];
        let (mut h, mut loss) = (0.0, 0.0);
        for (t, &x) in xs.iter().enumerate() {
            let c_prev = unit.prev_cell_state(t.checked_sub(1).map(|q| &cache[q * w..(q + 1) * w]));
            h = unit.forward(p, x, h, c_prev, &mut cache[t * w..(t + 1) * w]);
            loss += 0.5 * h * h;
        }
        loss
    }

    fn unit_grad(unit: Unit, p: &[f64], xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w = unit.cache_width();
        let n = xs.len();
        let mut cache = vec![0.0; w * n];
        let mut hs = vec![0.0; n];
        for t in 0..n {
            let h_prev = if t > 0 { hs[t - 1] } else { 0.0 };
            let c_prev = unit.prev_cell_state(t.checked_sub(1).map(|q| &cache[q * w..(q + 1) * w]));
            hs[t] = unit.forward(p, xs[t], h_prev, c_prev, &mut cache[t * w..(t + 1) * w]);
        }
        let mut dp = vec![0.0; p.len()];
        let mut dx = vec![0.0; n];
        let (mut dh_carry, mut dc_carry) = (0.0, 0.0);
        for t in (0..n).rev() {
            let h_prev = if t > 0 { hs[t - 1] } else { 0.0 };
            let c_prev = unit.prev_cell_state(t.checked_sub(1).map(|q| &cache[q * w..(q + 1) * w]));
            let dh = hs[t] + dh_carry;
            let (ds, dhp, dcp) = unit.backward(p, &cache[t * w..(t + 1) * w], hs[t], h_prev, c_prev, dh, dc_carry, &mut dp);
            dx[t] = ds;
            dh_carry = dhp;
            dc_carry = dcp;
        }
        (dp, dx)
    }

    #[test]
    fn single_unit_gradients_match_central_differences() {
        let xs = [0.3, -0.7, 1.1, 0.2, -0.4, 0.9];
        for (unit, n) in [(Unit::Identity, 1), (Unit::Tanh, 1), (Unit::Lstm, 12), (Unit::Gru, 9), (Unit::Mgu, 6)] {
            let p: Vec<f64> = (0..n).map(|k| ((k as f64) * 1.7).sin() * 0.8).collect();
            let (dp, dx) = unit_grad(unit, &p, &xs);
            let h = 1e-6;
            for k in 0..n {
                let mut hi = p.clone();
                let mut lo = p.clone();
                hi[k] += h;
                lo[k] -= h;
                let fd = (unit_loss(unit, &hi, &xs) - unit_loss(unit, &lo, &xs)) / (2.0 * h);
                assert!((fd - dp[k]).abs() < 1e-7 * (1.0 + fd.abs()), "{unit:?} p{k}: {fd} vs {}", dp[k]);
            }
            for t in 0..xs.len() {
                let mut hi = xs;
                let mut lo = xs;
                hi[t] += h;
                lo[t] -= h;
                let fd = (unit_loss(unit, &p, &hi) - unit_loss(unit, &p, &lo)) / (2.0 * h);
                assert!((fd - dx[t]).abs() < 1e-7 * (1.0 + fd.abs()), "{unit:?} x{t}: {fd} vs {}", dx[t]);
            }
        }
    }

    #[test]
    fn identity_and_tanh() {
        let mut c = [0.0];
        assert_eq!(Unit::Identity.forward(&[0.25], 2.0, 0.0, 0.0, &mut c), 2.25);
        assert_eq!(Unit::Tanh.forward(&[0.0], 0.5, 0.0, 0.0, &mut c), 0.5f64.tanh());
    }
}
