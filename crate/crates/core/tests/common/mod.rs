#![allow(dead_code)]

use std::collections::HashMap;

use neurotrade::rnn::{CellKind, EdgeGene, Genome, Lineage, NodeGene, NodeKind, RecurrentEdgeGene};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random valid genome with `n_inputs` inputs and `n_hidden` hidden nodes.
/// Every cell kind appears whenever `n_hidden >= 4`.
pub fn random_genome<R: Rng>(rng: &mut R, n_inputs: usize, n_hidden: usize) -> Genome {
    let mut next = 0u64;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut nodes: Vec<NodeGene> = (0..n_inputs).map(|_| NodeGene::input(fresh())).collect();
    let mut out = NodeGene::output(fresh());
    out.params[0] = rng.gen_range(-0.5..0.5);
    nodes.push(out);
    for k in 0..n_hidden {
        let cell = CellKind::ALL[k % 4];
        let depth = rng.gen_range(0.05..0.95);
        let params = (0..cell.param_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        nodes.push(NodeGene::hidden(fresh(), cell, depth, params));
    }

    let mut edges = Vec::new();
    let mut recurrent_edges = Vec::new();
    let snapshot: Vec<(u64, NodeKind, f64)> = nodes.iter().map(|n| (n.id, n.kind, n.depth)).collect();
    for &(id, kind, depth) in &snapshot {
        if kind == NodeKind::Input {
            continue;
        }
        let lower: Vec<u64> = snapshot.iter().filter(|s| s.2 < depth).map(|s| s.0).collect();
        let k = rng.gen_range(1..=lower.len().min(4));
        for &src in lower.choose_multiple(rng, k) {
            edges.push(EdgeGene {
                innovation: fresh(),
                source: src,
                target: id,
                weight: rng.gen_range(-1.0..1.0),
                enabled: true,
            });
        }
    }
    // make sure every hidden node feeds something deeper
    for &(id, kind, depth) in &snapshot {
        if kind != NodeKind::Hidden || edges.iter().any(|e| e.source == id) {
            continue;
        }
        let higher: Vec<u64> = snapshot.iter().filter(|s| s.2 > depth).map(|s| s.0).collect();
        edges.push(EdgeGene {
            innovation: fresh(),
            source: id,
            target: *higher.choose(rng).unwrap(),
            weight: rng.gen_range(-1.0..1.0),
            enabled: true,
        });
    }
    let non_inputs: Vec<u64> = snapshot.iter().filter(|s| s.1 != NodeKind::Input).map(|s| s.0).collect();
    for _ in 0..(n_hidden / 2 + 2) {
        recurrent_edges.push(RecurrentEdgeGene {
            innovation: fresh(),
            source: snapshot.choose(rng).unwrap().0,
            target: *non_inputs.choose(rng).unwrap(),
            weight: rng.gen_range(-0.8..0.8),
            enabled: true,
            time_skip: rng.gen_range(1..=10),
        });
    }
    let g = Genome {
        id: 0,
        nodes,
        edges,
        recurrent_edges,
        island: 0,
        fitness: None,
        lineage: Lineage::default(),
    };
    g.validate().expect("random genome is valid");
    g
}

pub fn random_series<R: Rng>(rng: &mut R, width: usize, len: usize) -> neurotrade::market_data::Series {
    let inputs = (0..width * len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let targets = (0..len).map(|_| rng.gen_range(-0.5..0.5)).collect();
    neurotrade::market_data::Series::new(width, inputs, targets)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Straightforward interpreter: evaluates `(node, t)` on demand with
/// memoization, reading the genome directly.
pub struct Reference<'a> {
    genome: &'a Genome,
    inputs: &'a [f64],
    width: usize,
    h: HashMap<(u64, usize), f64>,
    c: HashMap<(u64, usize), f64>,
}

impl<'a> Reference<'a> {
    pub fn new(genome: &'a Genome, inputs: &'a [f64], width: usize) -> Self {
        Self { genome, inputs, width, h: HashMap::new(), c: HashMap::new() }
    }

    fn enabled(&self, id: u64) -> bool {
        self.genome.nodes.iter().any(|n| n.id == id && n.enabled)
    }

    pub fn value(&mut self, id: u64, t: isize) -> f64 {
        if t < 0 {
            return 0.0;
        }
        let t = t as usize;
        if let Some(&v) = self.h.get(&(id, t)) {
            return v;
        }
        let node = self.genome.nodes.iter().find(|n| n.id == id).unwrap().clone();
        if !node.enabled {
            return 0.0;
        }
        let v = if node.kind == NodeKind::Input {
            let col = self.genome.input_ids().iter().position(|&i| i == id).unwrap();
            self.inputs[t * self.width + col]
        } else {
            let mut s = 0.0;
            for e in self.genome.edges.clone() {
                if e.enabled && e.target == id && self.enabled(e.source) {
                    s += e.weight * self.value(e.source, t as isize);
                }
            }
            for e in self.genome.recurrent_edges.clone() {
                if e.enabled && e.target == id && self.enabled(e.source) {
                    s += e.weight * self.value(e.source, t as isize - e.time_skip as isize);
                }
            }
            let hp = self.value(id, t as isize - 1);
            let p = &node.params;
            match (node.kind, node.cell) {
                (NodeKind::Output, _) => s + p[0],
                (_, CellKind::Simple) => (s + p[0]).tanh(),
                (_, CellKind::Lstm) => {
                    let cp = if t == 0 { 0.0 } else { self.c[&(id, t - 1)] };
                    let i = sigmoid(p[0] * s + p[1] * hp + p[2]);
                    let f = sigmoid(p[3] * s + p[4] * hp + p[5]);
                    let o = sigmoid(p[6] * s + p[7] * hp + p[8]);
                    let g = (p[9] * s + p[10] * hp + p[11]).tanh();
                    let c = f * cp + i * g;
                    self.c.insert((id, t), c);
                    o * c.tanh()
                }
                (_, CellKind::Gru) => {
                    let z = sigmoid(p[0] * s + p[1] * hp + p[2]);
                    let r = sigmoid(p[3] * s + p[4] * hp + p[5]);
                    let cand = (p[6] * s + p[7] * r * hp + p[8]).tanh();
                    (1.0 - z) * hp + z * cand
                }
                (_, CellKind::Mgu) => {
                    let f = sigmoid(p[0] * s + p[1] * hp + p[2]);
                    let cand = (p[3] * s + p[4] * f * hp + p[5]).tanh();
                    (1.0 - f) * hp + f * cand
                }
            }
        };
        self.h.insert((id, t), v);
        v
    }

    pub fn outputs(mut self, steps: usize) -> Vec<f64> {
        let out = self.genome.output_id().unwrap();
        (0..steps).map(|t| self.value(out, t as isize)).collect()
    }
}

/// Random panel and matching book over `n_tickers` tickers named `T00`,
/// `T01`, … Predictions are drawn from a few discrete levels so ties and
/// exact zeros occur. With `spread == 0` bid and ask equal the close.
pub fn random_market<R: Rng>(
    rng: &mut R,
    n_tickers: usize,
    n_days: usize,
    spread: f64,
) -> (neurotrade::trading::PredictionPanel, neurotrade::trading::PriceBook) {
    use neurotrade::trading::{PanelRecord, PredictionPanel, PriceBook, Quote};
    let start = chrono::NaiveDate::from_ymd_opt(2022, 1, 3).unwrap();
    let days = neurotrade::market_data::synthetic::weekdays(start, n_days);
    let mut book = PriceBook::new();
    let mut records = Vec::new();
    for k in 0..n_tickers {
        let ticker = format!("T{k:02}");
        let mut close: f64 = rng.gen_range(5.0..200.0);
        for &day in &days {
            close *= 1.0 + rng.gen_range(-0.05..0.05);
            let half = close * spread * rng.gen_range(0.5..1.5) / 2.0;
            book.insert(&ticker, day, Quote { close, bid: close - half, ask: close + half });
            let level: i32 = rng.gen_range(-3..=3);
            records.push(PanelRecord {
                date: day,
                ticker: ticker.clone(),
                predicted_return: level as f64 * 0.005,
                actual_return: rng.gen_range(-0.05..0.05),
            });
        }
    }
    (PredictionPanel::from_records(records).unwrap(), book)
}

/// Straightforward re-implementation of both strategies, used as an oracle.
/// Returns the final cash and the trades as `(day index, ticker, is_buy,
/// shares, price)`.
pub mod oracle {
    use neurotrade::trading::{CostModel, PredictionPanel, PriceBook, Side};

    pub type Fill = (usize, String, bool, f64, f64);

    fn px(book: &PriceBook, t: &str, p: &PredictionPanel, d: usize, buy: bool, cost: CostModel) -> f64 {
        let q = book.quote(t, p.days[d]).unwrap();
        let half = (q.ask - q.bid) / 2.0;
        match (cost, buy) {
            (CostModel::None, _) => q.close,
            (CostModel::HalfSpread, true) => q.close + half,
            (CostModel::HalfSpread, false) => q.close - half,
            (CostModel::BidAsk, true) => q.ask,
            (CostModel::BidAsk, false) => q.bid,
        }
    }

    pub fn long_only(p: &PredictionPanel, book: &PriceBook, cost: CostModel, c0: f64) -> (f64, Vec<Fill>) {
        let n = p.tickers.len();
        let mut cash = c0;
        let mut shares = vec![0.0; n];
        let mut fills = Vec::new();
        for d in 0..p.days.len() {
            for k in 0..n {
                if p.predicted[d][k] < 0.0 && shares[k] > 0.0 {
                    let price = px(book, &p.tickers[k], p, d, false, cost);
                    cash += shares[k] * price;
                    fills.push((d, p.tickers[k].clone(), false, shares[k], price));
                    shares[k] = 0.0;
                }
            }
            let up: Vec<usize> = (0..n).filter(|&k| p.predicted[d][k] > 0.0).collect();
            if !up.is_empty() && cash > 0.0 {
                let quota = cash / up.len() as f64;
                for &k in &up {
                    let price = px(book, &p.tickers[k], p, d, true, cost);
                    shares[k] += quota / price;
                    fills.push((d, p.tickers[k].clone(), true, quota / price, price));
                }
                cash = 0.0;
            }
        }
        let last = p.days.len() - 1;
        for k in 0..n {
            if shares[k] > 0.0 {
                let price = px(book, &p.tickers[k], p, last, false, cost);
                cash += shares[k] * price;
                fills.push((last, p.tickers[k].clone(), false, shares[k], price));
            }
        }
        (cash, fills)
    }

    pub fn long_short(
        p: &PredictionPanel,
        book: &PriceBook,
        cost: CostModel,
        c0: f64,
        nl: usize,
        ns: usize,
    ) -> (f64, Vec<Fill>) {
        let n = p.tickers.len();
        let mut cash = c0;
        let mut shares = vec![0.0; n];
        let mut fills = Vec::new();
        let flatten = |d: usize, cash: &mut f64, shares: &mut Vec<f64>, fills: &mut Vec<Fill>| {
            for k in 0..n {
                if shares[k] != 0.0 {
                    let buy = shares[k] < 0.0;
                    let price = px(book, &p.tickers[k], p, d, buy, cost);
                    *cash += shares[k] * price;
                    fills.push((d, p.tickers[k].clone(), buy, shares[k].abs(), price));
                    shares[k] = 0.0;
                }
            }
        };
        for d in 0..p.days.len() {
            // selection sort: highest prediction first, then ticker name
            let mut rest: Vec<usize> = (0..n).collect();
            let mut order = Vec::new();
            while !rest.is_empty() {
                let mut best = 0;
                for i in 1..rest.len() {
                    let (a, b) = (rest[i], rest[best]);
                    let (pa, pb) = (p.predicted[d][a], p.predicted[d][b]);
                    if pa > pb || (pa == pb && p.tickers[a] < p.tickers[b]) {
                        best = i;
                    }
                }
                order.push(rest.remove(best));
            }
            let gate = p.predicted[d][order[nl - 1]] > 0.0 && p.predicted[d][order[n - ns]] < 0.0;
            if !gate {
                continue;
            }
            flatten(d, &mut cash, &mut shares, &mut fills);
            if cash <= 0.0 {
                continue;
            }
            let (ql, qs) = (cash / nl as f64, cash / ns as f64);
            for &k in &order[..nl] {
                let price = px(book, &p.tickers[k], p, d, true, cost);
                shares[k] += ql / price;
                cash -= (ql / price) * price;
                fills.push((d, p.tickers[k].clone(), true, ql / price, price));
            }
            for &k in &order[n - ns..] {
                let price = px(book, &p.tickers[k], p, d, false, cost);
                shares[k] -= qs / price;
                cash += (qs / price) * price;
                fills.push((d, p.tickers[k].clone(), false, qs / price, price));
            }
        }
        flatten(p.days.len() - 1, &mut cash, &mut shares, &mut fills);
        (cash, fills)
    }

    /// Converts a report's trade log into oracle fills.
    pub fn fills_of(p: &PredictionPanel, trades: &[neurotrade::trading::Trade]) -> Vec<Fill> {
        trades
            .iter()
            .map(|t| {
                let d = p.days.iter().position(|&x| x == t.day).unwrap();
                (d, t.ticker.clone(), t.side == Side::Buy, t.shares, t.price)
            })
            .collect()
    }

    /// Same side and ticker on the same day in the same order, with shares
    /// and prices equal to `tol` relative.
    pub fn same_fills(a: &[Fill], b: &[Fill], tol: f64) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-300);
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| {
                x.0 == y.0 && x.1 == y.1 && x.2 == y.2 && close(x.3, y.3) && close(x.4, y.4)
            })
    }
}
