//! Minimal reverse-mode tape over `f64` primitives.
//!
//! The solve driver can record every arithmetic operation it performs as a
//! node — seed, constant, add, multiply, divide, or negate — carrying parent
//! indices, the computed value, and the local partial derivatives taken at
//! record time. Two guarantees follow:
//!
//! * **Replay**: recomputing the tape forward from its seeds reproduces every
//!   recorded value bit-for-bit ([`Tape::replay`]). The tape is the exact
//!   computation, not a summary of it.
//! * **Backprop**: a reverse sweep from the recorded outputs accumulates the
//!   derivative of the final iterate with respect to the coefficient seeds
//!   ([`backprop_through_newton`]).
//!
//! Control flow is deliberately *not* on the tape. Convergence tests and
//! bracket substitutions decide *which* arithmetic gets recorded, but the
//! decisions themselves enter differentiation as constants — the standard
//! computational-graph convention for branches, and the one whose
//! consequences the iteration-count experiments measure.

/// Which input a seed node carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSlot {
    /// Leading coefficient `a`.
    A,
    /// Linear coefficient `b`.
    B,
    /// Constant coefficient `c`.
    C,
    /// Real part of the start iterate.
    T0Real,
    /// Imaginary part of the start iterate.
    T0Imag,
}

const SEED_SLOTS: [SeedSlot; 5] = [
    SeedSlot::A,
    SeedSlot::B,
    SeedSlot::C,
    SeedSlot::T0Real,
    SeedSlot::T0Imag,
];

/// Operation performed by a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TapeOp {
    /// Differentiation input (one of the five [`SeedSlot`]s).
    Seed(SeedSlot),
    /// Literal constant (step sizes, branch-frozen values, ...).
    Const,
    /// `lhs + rhs`
    Add,
    /// `lhs * rhs`
    Mul,
    /// `lhs / rhs`
    Div,
    /// `-lhs`
    Neg,
}

/// One recorded operation: parents, value, and local partials.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    /// What was computed.
    pub op: TapeOp,
    /// Index of the left parent (unused for seeds and constants).
    pub lhs: u32,
    /// Index of the right parent (unused for unary ops, seeds, constants).
    pub rhs: u32,
    /// Value computed at record time.
    pub value: f64,
    /// Partial of `value` with respect to the left parent.
    pub dl: f64,
    /// Partial of `value` with respect to the right parent.
    pub dr: f64,
}

/// Mismatch found by [`Tape::replay`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayMismatch {
    /// Index of the first node whose recomputed value differs.
    pub index: usize,
    /// Value stored on the tape.
    pub recorded: f64,
    /// Value obtained by recomputing from the seeds.
    pub recomputed: f64,
}

/// Append-only record of a Newton run's arithmetic.
#[derive(Debug, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
    seeds: [u32; 5],
    outputs: Option<(u32, u32)>,
}

impl Tape {
    /// Fresh tape seeded with the coefficients and the start iterate.
    ///
    /// The five seed nodes occupy indices `0..5` in [`SEED_SLOTS`] order.
    pub(crate) fn new(a: f64, b: f64, c: f64, t0r: f64, t0i: f64) -> Self {
        let mut tape = Tape {
            nodes: Vec::new(),
            seeds: [0; 5],
            outputs: None,
        };
        for (slot, value) in SEED_SLOTS.into_iter().zip([a, b, c, t0r, t0i]) {
            let id = tape.push(Node {
                op: TapeOp::Seed(slot),
                lhs: 0,
                rhs: 0,
                value,
                dl: 0.0,
                dr: 0.0,
            });
            tape.seeds[seed_ordinal(slot)] = id;
        }
        tape
    }

    fn push(&mut self, node: Node) -> u32 {
        let id = u32::try_from(self.nodes.len()).expect("tape exceeds u32 indexing");
        self.nodes.push(node);
        id
    }

    pub(crate) fn konst(&mut self, value: f64) -> u32 {
        self.push(Node {
            op: TapeOp::Const,
            lhs: 0,
            rhs: 0,
            value,
            dl: 0.0,
            dr: 0.0,
        })
    }

    pub(crate) fn add(&mut self, x: u32, y: u32) -> u32 {
        let value = self.value_at(x) + self.value_at(y);
        self.push(Node {
            op: TapeOp::Add,
            lhs: x,
            rhs: y,
            value,
            dl: 1.0,
            dr: 1.0,
        })
    }

    pub(crate) fn mul(&mut self, x: u32, y: u32) -> u32 {
        let (vx, vy) = (self.value_at(x), self.value_at(y));
        self.push(Node {
            op: TapeOp::Mul,
            lhs: x,
            rhs: y,
            value: vx * vy,
            dl: vy,
            dr: vx,
        })
    }

    pub(crate) fn div(&mut self, x: u32, y: u32) -> u32 {
        let (vx, vy) = (self.value_at(x), self.value_at(y));
        self.push(Node {
            op: TapeOp::Div,
            lhs: x,
            rhs: y,
            value: vx / vy,
            dl: 1.0 / vy,
            dr: -vx / (vy * vy),
        })
    }

    pub(crate) fn neg(&mut self, x: u32) -> u32 {
        let value = -self.value_at(x);
        self.push(Node {
            op: TapeOp::Neg,
            lhs: x,
            rhs: 0,
            value,
            dl: -1.0,
            dr: 0.0,
        })
    }

    pub(crate) fn set_outputs(&mut self, out_r: u32, out_i: u32) {
        self.outputs = Some((out_r, out_i));
    }

    pub(crate) fn value_at(&self, id: u32) -> f64 {
        self.nodes[id as usize].value
    }

    /// Number of recorded nodes (seeds included).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the tape holds no nodes at all.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All recorded nodes, in execution order.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Node indices of the final iterate `(tR, tI)`, if recorded.
    pub fn outputs(&self) -> Option<(usize, usize)> {
        self.outputs.map(|(r, i)| (r as usize, i as usize))
    }

    /// Node index of a seed slot.
    pub fn seed_index(&self, slot: SeedSlot) -> usize {
        self.seeds[seed_ordinal(slot)] as usize
    }

    /// Recompute every node forward from the seeds and check that each value
    /// matches the recorded one bit-for-bit (NaN compares equal to itself by
    /// bit pattern).
    pub fn replay(&self) -> Result<(), ReplayMismatch> {
        let mut values: Vec<f64> = Vec::with_capacity(self.nodes.len());
        for (index, node) in self.nodes.iter().enumerate() {
            let recomputed = match node.op {
                TapeOp::Seed(_) | TapeOp::Const => node.value,
                TapeOp::Add => values[node.lhs as usize] + values[node.rhs as usize],
                TapeOp::Mul => values[node.lhs as usize] * values[node.rhs as usize],
                TapeOp::Div => values[node.lhs as usize] / values[node.rhs as usize],
                TapeOp::Neg => -values[node.lhs as usize],
            };
            if recomputed.to_bits() != node.value.to_bits() {
                return Err(ReplayMismatch {
                    index,
                    recorded: node.value,
                    recomputed,
                });
            }
            values.push(recomputed);
        }
        Ok(())
    }

    /// Reverse sweep: derivative of the node `out` with respect to every
    /// earlier node; returns the adjoint vector.
    fn adjoints(&self, out: u32) -> Vec<f64> {
        let mut adj = vec![0.0; self.nodes.len()];
        adj[out as usize] = 1.0;
        for i in (0..self.nodes.len()).rev() {
            let a = adj[i];
            // Zero adjoints carry nothing downstream; skipping them also keeps
            // dead branches with non-finite local partials (e.g. a recorded
            // division by zero) from poisoning live gradients with 0 * inf.
            if a == 0.0 {
                continue;
            }
            let node = &self.nodes[i];
            match node.op {
                TapeOp::Add | TapeOp::Mul | TapeOp::Div => {
                    adj[node.lhs as usize] += a * node.dl;
                    adj[node.rhs as usize] += a * node.dr;
                }
                TapeOp::Neg => {
                    adj[node.lhs as usize] += a * node.dl;
                }
                TapeOp::Seed(_) | TapeOp::Const => {}
            }
        }
        adj
    }

    #[cfg(test)]
    pub(crate) fn corrupt_for_test(&mut self, index: usize, value: f64) {
        self.nodes[index].value = value;
    }
}

fn seed_ordinal(slot: SeedSlot) -> usize {
    match slot {
        SeedSlot::A => 0,
        SeedSlot::B => 1,
        SeedSlot::C => 2,
        SeedSlot::T0Real => 3,
        SeedSlot::T0Imag => 4,
    }
}

/// Jacobian of the recorded final iterate with respect to `(a, b, c)`.
///
/// Row 0 is `d tR_n / d(a, b, c)`, row 1 is `d tI_n / d(a, b, c)`, both
/// obtained by reverse sweeps over the recorded arithmetic. For a run that
/// stayed on the real axis the second row is identically zero.
///
/// # Panics
///
/// Panics if the tape has no recorded outputs (i.e. it did not come from a
/// completed solve).
pub fn backprop_through_newton(tape: &Tape) -> [[f64; 3]; 2] {
    let (out_r, out_i) = tape
        .outputs
        .expect("tape has no recorded outputs; run newton_solve with record_tape");
    let mut rows = [[0.0; 3]; 2];
    for (row, out) in rows.iter_mut().zip([out_r, out_i]) {
        let adj = tape.adjoints(out);
        *row = [
            adj[tape.seed_index(SeedSlot::A)],
            adj[tape.seed_index(SeedSlot::B)],
            adj[tape.seed_index(SeedSlot::C)],
        ];
    }
    rows
}
