//! Long-run state occupancy of the sender automaton on i.i.d. uniform bits.

use std::collections::VecDeque;

use super::tables::EncodingTable;
use super::INITIAL_STATE;

const TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    /// `ρ_S` for every state; zero outside the recurrent class.
    pub probs: Vec<f64>,
    /// The closed class reached from the initial state, ascending.
    pub recurrent_class: Vec<u32>,
    /// Whether the class is all of `0..L`.
    pub irreducible: bool,
    /// Whether other recurrent classes are also reachable from the initial
    /// state; `probs` then describes only `recurrent_class`.
    pub other_classes_reachable: bool,
    pub iterations: usize,
}

impl StationaryDistribution {
    /// `Σ_S ρ_S [symbol[S] = x]` for every symbol.
    pub fn symbol_frequencies(&self, table: &EncodingTable) -> Vec<f64> {
        let mut freq = vec![0.0; table.alphabet_len()];
        for (rho, e) in self.probs.iter().zip(table.entries()) {
            freq[e.symbol] += rho;
        }
        freq
    }

    /// Expected bits read per step.
    pub fn bits_per_symbol(&self, table: &EncodingTable) -> f64 {
        self.probs
            .iter()
            .zip(table.entries())
            .map(|(rho, e)| rho * e.nb_bits as f64)
            .sum()
    }
}

/// One step of the lazy chain `½ρ + ½Pρ`. From `S`
/// the automaton moves uniformly onto `new_state .. new_state + 2^nb_bits`.
fn lazy_step(table: &EncodingTable, rho: &[f64], out: &mut [f64], diff: &mut [f64]) {
    diff.iter_mut().for_each(|d| *d = 0.0);
    for (mass, e) in rho.iter().zip(table.entries()) {
        if *mass == 0.0 {
            continue;
        }
        let width = 1usize << e.nb_bits;
        let share = mass / width as f64;
        diff[e.new_state as usize] += share;
        diff[e.new_state as usize + width] -= share;
    }
    let mut running = 0.0;
    for (i, o) in out.iter_mut().enumerate() {
        running += diff[i];
        *o = 0.5 * rho[i] + 0.5 * running;
    }
}

fn power_iterate(table: &EncodingTable, mut rho: Vec<f64>) -> (Vec<f64>, usize) {
    let l = rho.len();
    let mut next = vec![0.0; l];
    let mut diff = vec![0.0; l + 1];
    for it in 1..=MAX_ITERATIONS {
        lazy_step(table, &rho, &mut next, &mut diff);
        let change: f64 = rho.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rho, &mut next);
        if change < TOLERANCE {
            return (rho, it);
        }
    }
    (rho, MAX_ITERATIONS)
}

fn reachable_from(table: &EncodingTable, start: u32) -> Vec<bool> {
    let l = table.states() as usize;
    let mut seen = vec![false; l];
    let mut queue = VecDeque::from([start as usize]);
    seen[start as usize] = true;
    while let Some(s) = queue.pop_front() {
        let e = table.entries()[s];
        let first = e.new_state as usize;
        for (t, flag) in seen.iter_mut().enumerate().skip(first).take(1 << e.nb_bits) {
            if !*flag {
                *flag = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Stationary distribution of the state chain reached from the initial
/// state, by power iteration of the lazy chain (same fixed point,
/// aperiodic) until successive iterates differ by less than `1e-12` in L1.
pub fn stationary_distribution(table: &EncodingTable) -> StationaryDistribution {
    let l = table.states() as usize;
    let mut start = vec![0.0; l];
    start[INITIAL_STATE as usize] = 1.0;
    let (from_initial, first_pass) = power_iterate(table, start);

    // The heaviest state is recurrent; everything it reaches is its class.
    let anchor = from_initial
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i as u32)
        .unwrap_or(INITIAL_STATE);
    let class_mask = reachable_from(table, anchor);
    let recurrent_class: Vec<u32> = (0..l as u32).filter(|&s| class_mask[s as usize]).collect();
    let outside: f64 = from_initial
        .iter()
        .zip(&class_mask)
        .filter(|(_, &inside)| !inside)
        .map(|(rho, _)| rho)
        .sum();

    let size = recurrent_class.len() as f64;
    let uniform_on_class = class_mask
        .iter()
        .map(|&inside| if inside { 1.0 / size } else { 0.0 })
        .collect();
    let (probs, second_pass) = power_iterate(table, uniform_on_class);
    StationaryDistribution {
        probs,
        irreducible: recurrent_class.len() == l,
        recurrent_class,
        other_classes_reachable: outside > 1e-6,
        iterations: first_pass + second_pass,
    }
}
