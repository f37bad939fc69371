//! Complete DPLL search with two watched literals per clause.
//!
//! Decisions pick the lowest unassigned variable and try `false` first;
//! backtracking is chronological. There is no randomness anywhere, so a
//! given clause set always yields the same answer and the same model.

use super::cnf::{ClauseSet, Lit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    Unassigned,
    True,
    False,
}

pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    units: Vec<Lit>,
    has_empty: bool,
    num_vars: usize,
    values: Vec<Value>,
    trail: Vec<Lit>,
    /// (trail length before the decision, decision literal, already flipped)
    decisions: Vec<(usize, Lit, bool)>,
    head: usize,
}

impl Solver {
    pub fn new(cnf: &ClauseSet) -> Self {
        let num_vars = cnf.num_vars();
        let mut s = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            units: Vec::new(),
            has_empty: false,
            num_vars,
            values: vec![Value::Unassigned; num_vars],
            trail: Vec::new(),
            decisions: Vec::new(),
            head: 0,
        };
        for c in &cnf.clauses {
            match c.len() {
                0 => s.has_empty = true,
                1 => s.units.push(c[0]),
                _ => {
                    let idx = s.clauses.len();
                    s.watches[c[0].code()].push(idx);
                    s.watches[c[1].code()].push(idx);
                    s.clauses.push(c.clone());
                }
            }
        }
        s
    }

    fn value(&self, l: Lit) -> Value {
        match self.values[l.var() as usize] {
            Value::Unassigned => Value::Unassigned,
            Value::True if l.is_positive() => Value::True,
            Value::False if !l.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    fn assign(&mut self, l: Lit) {
        self.values[l.var() as usize] = if l.is_positive() {
            Value::True
        } else {
            Value::False
        };
        self.trail.push(l);
    }

    /// Enqueues `l` unless it is already true; returns false on a clash.
    fn enqueue(&mut self, l: Lit) -> bool {
        match self.value(l) {
            Value::True => true,
            Value::False => false,
            Value::Unassigned => {
                self.assign(l);
                true
            }
        }
    }

    fn propagate(&mut self) -> bool {
        while self.head < self.trail.len() {
            let falsified = !self.trail[self.head];
            self.head += 1;
            let mut watchers = std::mem::take(&mut self.watches[falsified.code()]);
            let mut i = 0;
            let mut ok = true;
            while i < watchers.len() {
                let ci = watchers[i];
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                let other_val = match self.values[other.var() as usize] {
                    Value::Unassigned => Value::Unassigned,
                    Value::True if other.is_positive() => Value::True,
                    Value::False if !other.is_positive() => Value::True,
                    _ => Value::False,
                };
                if other_val == Value::True {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let cand = clause[k];
                    let v = self.values[cand.var() as usize];
                    let cand_false = matches!(
                        (v, cand.is_positive()),
                        (Value::True, false) | (Value::False, true)
                    );
                    if !cand_false {
                        clause.swap(1, k);
                        self.watches[clause[1].code()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    watchers.swap_remove(i);
                    continue;
                }
                i += 1;
                if other_val == Value::False {
                    ok = false;
                    break;
                }
                self.assign(other);
            }
            self.watches[falsified.code()].append(&mut watchers);
            if !ok {
                return false;
            }
        }
        true
    }

    fn reset(&mut self) {
        for v in self.values.iter_mut() {
            *v = Value::Unassigned;
        }
        self.trail.clear();
        self.decisions.clear();
        self.head = 0;
    }

    /// Undoes the most recent unflipped decision and asserts its negation.
    /// Returns false when no such decision is left.
    fn backtrack(&mut self) -> bool {
        while let Some((len, lit, flipped)) = self.decisions.pop() {
            for l in self.trail.drain(len..) {
                self.values[l.var() as usize] = Value::Unassigned;
            }
            self.head = len;
            if !flipped {
                self.decisions.push((len, !lit, true));
                self.assign(!lit);
                return true;
            }
        }
        false
    }

    /// Decides satisfiability under `assumptions`, returning a model indexed
    /// by variable when one exists.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Option<Vec<bool>> {
        self.reset();
        if self.has_empty {
            return None;
        }
        let roots: Vec<Lit> = self.units.iter().chain(assumptions).copied().collect();
        for l in roots {
            if !self.enqueue(l) {
                return None;
            }
        }
        let mut next_var = 0;
        loop {
            if !self.propagate() {
                if !self.backtrack() {
                    return None;
                }
                next_var = 0;
                continue;
            }
            while next_var < self.num_vars && self.values[next_var] != Value::Unassigned {
                next_var += 1;
            }
            if next_var == self.num_vars {
                return Some(self.values.iter().map(|&v| v == Value::True).collect());
            }
            let d = Lit::new(next_var as u32, false);
            self.decisions.push((self.trail.len(), d, false));
            self.assign(d);
        }
    }
}
