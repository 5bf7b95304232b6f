//! Reduced ordered binary decision diagrams over complete truth tables.
//!
//! A truth table of length `2^n` encodes a boolean function of variables
//! `x_0 .. x_{n-1}`, where variable `x_0` indexes the *most significant* bit
//! of the row number: row `i` assigns `x_v = bit (n-1-v) of i`. Construction
//! hash-conses nodes bottom-up, so [`Bdd::from_truth_table`] directly yields
//! the canonical reduced diagram for the natural variable order: no node has
//! equal children and no two nodes share `(var, lo, hi)`. Equivalently,
//! every node's sub-table is a *bead* — a string of length `2^k` that does
//! not repeat itself at its midpoint. Five-sixths of the value of the
//! structure is the contrapositive: a variable whose every sub-table at its
//! level splits into two identical halves cannot label any node, so
//! canonical reduction deletes exactly the variables the function does not
//! depend on.
//!
//! [`Bdd::unreduced_from_truth_table`] builds the full binary decision tree
//! instead (one node per internal position), and [`Bdd::reduce`] collapses
//! any diagram to canonical form; the two routes agree node-for-node with
//! direct construction, which the tests exploit.
//!
//! Custom variable orders are supported by permuting the table up front;
//! node labels always refer to the original variable numbering. Order
//! changes the *shape* (node count) of the diagram, sometimes
//! exponentially, but never which variables appear.

use super::FeatselError;
use std::collections::{BTreeSet, HashMap};

/// Terminal node id for the constant-false leaf.
pub const TERM_FALSE: u32 = 0;
/// Terminal node id for the constant-true leaf.
pub const TERM_TRUE: u32 = 1;

const TERM_VAR: u32 = u32::MAX;

/// One internal decision node: branch on `var`, to `lo` when the variable
/// is 0 and `hi` when it is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BddNode {
    pub var: u32,
    pub lo: u32,
    pub hi: u32,
}

/// An ordered binary decision diagram. Node ids 0 and 1 are the terminals;
/// internal nodes follow.
#[derive(Debug, Clone)]
pub struct Bdd {
    num_vars: u32,
    nodes: Vec<BddNode>,
    root: u32,
}

fn table_vars(table: &[bool]) -> Result<u32, FeatselError> {
    if table.is_empty() || !table.len().is_power_of_two() {
        return Err(FeatselError::BadTableLength(table.len()));
    }
    Ok(table.len().trailing_zeros())
}

impl Bdd {
    fn with_terminals(num_vars: u32) -> Self {
        let t = BddNode { var: TERM_VAR, lo: 0, hi: 0 };
        Bdd { num_vars, nodes: vec![t, t], root: TERM_FALSE }
    }

    /// Canonical reduced BDD of the table under the natural order
    /// `x_0, x_1, ..` (most significant row bit first).
    pub fn from_truth_table(table: &[bool]) -> Result<Bdd, FeatselError> {
        let n = table_vars(table)?;
        let order: Vec<usize> = (0..n as usize).collect();
        Self::from_truth_table_with_order(table, &order)
    }

    /// Canonical reduced BDD testing `order[0]` at the root, then
    /// `order[1]`, and so on. `order` must be a permutation of `0..n`.
    /// Node labels keep the original variable numbering.
    pub fn from_truth_table_with_order(
        table: &[bool],
        order: &[usize],
    ) -> Result<Bdd, FeatselError> {
        let n = table_vars(table)?;
        check_order(order, n)?;
        let permuted = permute_table(table, order, n);
        let mut bdd = Bdd::with_terminals(n);
        let mut cons: HashMap<BddNode, u32> = HashMap::new();
        bdd.root = build_reduced(&mut bdd.nodes, &mut cons, &permuted, order, 0);
        Ok(bdd)
    }

    /// The full decision tree for the table: one node per internal
    /// position, no sharing, no elisions. Exists so that [`Bdd::reduce`]
    /// has something honest to chew on.
    pub fn unreduced_from_truth_table(table: &[bool]) -> Result<Bdd, FeatselError> {
        let n = table_vars(table)?;
        let mut bdd = Bdd::with_terminals(n);
        bdd.root = build_tree(&mut bdd.nodes, table, 0);
        Ok(bdd)
    }

    /// Canonical form of `self`: structurally equal nodes merged and nodes
    /// with identical children bypassed, repeated to fixpoint (the
    /// bottom-up pass achieves the fixpoint in one sweep). The represented
    /// function is unchanged.
    pub fn reduce(&self) -> Bdd {
        let mut out = Bdd::with_terminals(self.num_vars);
        let mut cons: HashMap<BddNode, u32> = HashMap::new();
        let mut memo: HashMap<u32, u32> = HashMap::new();
        memo.insert(TERM_FALSE, TERM_FALSE);
        memo.insert(TERM_TRUE, TERM_TRUE);
        out.root = reduce_rec(&mut out.nodes, &mut cons, &mut memo, &self.nodes, self.root);
        out
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    /// Evaluate the represented function on a full assignment.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        assert!(assignment.len() >= self.num_vars as usize, "assignment too short");
        let mut at = self.root;
        while at > TERM_TRUE {
            let n = self.nodes[at as usize];
            at = if assignment[n.var as usize] { n.hi } else { n.lo };
        }
        at == TERM_TRUE
    }

    fn reachable(&self) -> Vec<u32> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        let mut out = Vec::new();
        while let Some(id) = stack.pop() {
            if seen[id as usize] {
                continue;
            }
            seen[id as usize] = true;
            if id > TERM_TRUE {
                out.push(id);
                let n = self.nodes[id as usize];
                stack.push(n.lo);
                stack.push(n.hi);
            }
        }
        out
    }

    /// Number of reachable internal (decision) nodes.
    pub fn node_count(&self) -> usize {
        self.reachable().len()
    }

    /// Variables labelling at least one reachable internal node. For a
    /// canonical diagram these are exactly the variables the function
    /// depends on.
    pub fn informative_vars(&self) -> BTreeSet<u32> {
        self.reachable().iter().map(|&id| self.nodes[id as usize].var).collect()
    }

    /// True iff no reachable node has equal children and no two reachable
    /// nodes are structurally identical.
    pub fn is_canonical(&self) -> bool {
        let mut seen: BTreeSet<(u32, u32, u32)> = BTreeSet::new();
        for id in self.reachable() {
            let n = self.nodes[id as usize];
            if n.lo == n.hi || !seen.insert((n.var, n.lo, n.hi)) {
                return false;
            }
        }
        true
    }

    /// GraphViz DOT rendering. `labels[v]`, when provided, names variable
    /// `v`; dashed edges are the 0-branch.
    pub fn to_dot(&self, labels: Option<&[String]>) -> String {
        use std::fmt::Write;
        let name = |v: u32| -> String {
            match labels {
                Some(ls) if (v as usize) < ls.len() => ls[v as usize].clone(),
                _ => format!("x{v}"),
            }
        };
        let mut s = String::from("digraph bdd {\n  rankdir=TB;\n");
        s.push_str("  n0 [shape=box, label=\"0\"];\n  n1 [shape=box, label=\"1\"];\n");
        let mut ids = self.reachable();
        ids.sort_unstable();
        for id in &ids {
            let n = self.nodes[*id as usize];
            writeln!(s, "  n{id} [label=\"{}\"];", name(n.var)).unwrap();
        }
        for id in &ids {
            let n = self.nodes[*id as usize];
            writeln!(s, "  n{id} -> n{} [style=dashed];", n.lo).unwrap();
            writeln!(s, "  n{id} -> n{};", n.hi).unwrap();
        }
        if self.root <= TERM_TRUE {
            writeln!(s, "  root [shape=plaintext, label=\"\"];\n  root -> n{};", self.root)
                .unwrap();
        }
        s.push_str("}\n");
        s
    }
}

fn check_order(order: &[usize], n: u32) -> Result<(), FeatselError> {
    let mut seen = vec![false; n as usize];
    if order.len() != n as usize {
        return Err(FeatselError::BadOrder(format!(
            "order lists {} variables, table has {n}",
            order.len()
        )));
    }
    for &v in order {
        if v >= n as usize || seen[v] {
            return Err(FeatselError::BadOrder(format!("order is not a permutation: {order:?}")));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Reindex the table so that branching on row-bit `level` tests original
/// variable `order[level]`.
fn permute_table(table: &[bool], order: &[usize], n: u32) -> Vec<bool> {
    let identity = order.iter().enumerate().all(|(i, &v)| i == v);
    if identity {
        return table.to_vec();
    }
    let n = n as usize;
    (0..table.len())
        .map(|new_i| {
            let mut old_i = 0usize;
            for (level, &v) in order.iter().enumerate() {
                let bit = new_i >> (n - 1 - level) & 1;
                old_i |= bit << (n - 1 - v);
            }
            table[old_i]
        })
        .collect()
}

fn terminal(b: bool) -> u32 {
    if b {
        TERM_TRUE
    } else {
        TERM_FALSE
    }
}

fn build_reduced(
    nodes: &mut Vec<BddNode>,
    cons: &mut HashMap<BddNode, u32>,
    table: &[bool],
    order: &[usize],
    level: usize,
) -> u32 {
    if table.len() == 1 {
        return terminal(table[0]);
    }
    let half = table.len() / 2;
    let lo = build_reduced(nodes, cons, &table[..half], order, level + 1);
    let hi = build_reduced(nodes, cons, &table[half..], order, level + 1);
    if lo == hi {
        return lo;
    }
    let node = BddNode { var: order[level] as u32, lo, hi };
    *cons.entry(node).or_insert_with(|| {
        nodes.push(node);
        nodes.len() as u32 - 1
    })
}

fn build_tree(nodes: &mut Vec<BddNode>, table: &[bool], level: u32) -> u32 {
    if table.len() == 1 {
        return terminal(table[0]);
    }
    let half = table.len() / 2;
    let lo = build_tree(nodes, &table[..half], level + 1);
    let hi = build_tree(nodes, &table[half..], level + 1);
    nodes.push(BddNode { var: level, lo, hi });
    nodes.len() as u32 - 1
}

fn reduce_rec(
    out: &mut Vec<BddNode>,
    cons: &mut HashMap<BddNode, u32>,
    memo: &mut HashMap<u32, u32>,
    old: &[BddNode],
    id: u32,
) -> u32 {
    if let Some(&m) = memo.get(&id) {
        return m;
    }
    let n = old[id as usize];
    let lo = reduce_rec(out, cons, memo, old, n.lo);
    let hi = reduce_rec(out, cons, memo, old, n.hi);
    let new_id = if lo == hi {
        lo
    } else {
        let node = BddNode { var: n.var, lo, hi };
        *cons.entry(node).or_insert_with(|| {
            out.push(node);
            out.len() as u32 - 1
        })
    };
    memo.insert(id, new_id);
    new_id
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Independent support oracle: variable at level `l` (natural order)
    /// matters iff some contiguous chunk of length `2^(n-l)` has two
    /// different halves.
    fn chunk_support_oracle(table: &[bool]) -> BTreeSet<u32> {
        let n = table.len().trailing_zeros();
        let mut vars = BTreeSet::new();
        for level in 0..n {
            let chunk = table.len() >> level;
            let half = chunk / 2;
            let differs = table
                .chunks(chunk)
                .any(|c| c[..half] != c[half..]);
            if differs {
                vars.insert(level);
            }
        }
        vars
    }

    fn eval_all(bdd: &Bdd, n: usize) -> Vec<bool> {
        (0..1usize << n)
            .map(|row| {
                let assignment: Vec<bool> =
                    (0..n).map(|v| row >> (n - 1 - v) & 1 == 1).collect();
                bdd.evaluate(&assignment)
            })
            .collect()
    }

    #[test]
    fn conjunction_skips_middle_variable() {
        // f(x0,x1,x2) = x0 AND x2 as a truth table: row = x0 x1 x2.
        let table: Vec<bool> = (0..8).map(|r| r & 0b100 != 0 && r & 0b001 != 0).collect();
        let bdd = Bdd::from_truth_table(&table).unwrap();
        assert_eq!(bdd.informative_vars(), BTreeSet::from([0, 2]));
        assert_eq!(bdd.node_count(), 2);
        assert!(bdd.is_canonical());
        assert_eq!(eval_all(&bdd, 3), table);
    }

    #[test]
    fn byte_00000101_reduces_to_two_nodes() {
        let table: Vec<bool> = "00000101".chars().map(|c| c == '1').collect();
        // Root splits "0000" vs "0101": a bead. The halves of "0000" agree,
        // so x1 never labels a node.
        let direct = Bdd::from_truth_table(&table).unwrap();
        assert_eq!(direct.informative_vars(), BTreeSet::from([0, 2]));
        let via_tree = Bdd::unreduced_from_truth_table(&table).unwrap();
        assert_eq!(via_tree.node_count(), 7);
        assert!(!via_tree.is_canonical());
        let reduced = via_tree.reduce();
        assert!(reduced.is_canonical());
        assert_eq!(reduced.node_count(), direct.node_count());
        assert_eq!(reduced.informative_vars(), direct.informative_vars());
        assert_eq!(eval_all(&reduced, 3), table);
    }

    #[test]
    fn constants_have_no_internal_nodes() {
        for value in [false, true] {
            let table = vec![value; 16];
            let bdd = Bdd::from_truth_table(&table).unwrap();
            assert_eq!(bdd.node_count(), 0);
            assert!(bdd.informative_vars().is_empty());
            assert_eq!(bdd.root(), if value { TERM_TRUE } else { TERM_FALSE });
        }
    }

    #[test]
    fn parity_keeps_every_variable() {
        let n = 4;
        let table: Vec<bool> = (0..1usize << n).map(|r| r.count_ones() % 2 == 1).collect();
        let bdd = Bdd::from_truth_table(&table).unwrap();
        assert_eq!(bdd.informative_vars(), BTreeSet::from([0, 1, 2, 3]));
        assert_eq!(eval_all(&bdd, n), table);
    }

    #[test]
    fn all_four_variable_functions_round_trip_exhaustively() {
        for f in 0..1u32 << 16 {
            let table: Vec<bool> = (0..16).map(|i| f >> i & 1 == 1).collect();
            let bdd = Bdd::from_truth_table(&table).unwrap();
            assert!(bdd.is_canonical(), "function {f:#06x} not canonical");
            assert_eq!(eval_all(&bdd, 4), table, "function {f:#06x} mis-evaluates");
            assert_eq!(
                bdd.informative_vars(),
                chunk_support_oracle(&table),
                "function {f:#06x} support mismatch"
            );
        }
    }

    #[test]
    fn random_twelve_variable_tables_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(2024);
        for _ in 0..10 {
            let table: Vec<bool> = (0..1usize << 12).map(|_| rng.random_bool(0.5)).collect();
            let bdd = Bdd::from_truth_table(&table).unwrap();
            assert!(bdd.is_canonical());
            assert_eq!(eval_all(&bdd, 12), table);
            assert_eq!(bdd.informative_vars(), chunk_support_oracle(&table));
            let reduced = Bdd::unreduced_from_truth_table(&table).unwrap().reduce();
            assert_eq!(reduced.node_count(), bdd.node_count());
        }
    }

    #[test]
    fn planted_redundant_variables_are_eliminated() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let live = rng.random_range(1..=4usize);
            let junk = rng.random_range(1..=4usize);
            let n = live + junk;
            // Choose which variable positions carry the live function.
            let mut positions: Vec<usize> = (0..n).collect();
            for i in 0..n {
                let j = rng.random_range(i..n);
                positions.swap(i, j);
            }
            let live_pos: Vec<usize> = positions[..live].to_vec();
            let core: Vec<bool> = (0..1usize << live).map(|_| rng.random_bool(0.5)).collect();
            let table: Vec<bool> = (0..1usize << n)
                .map(|row| {
                    let mut key = 0usize;
                    for (k, &p) in live_pos.iter().enumerate() {
                        key |= (row >> (n - 1 - p) & 1) << (live - 1 - k);
                    }
                    core[key]
                })
                .collect();
            let bdd = Bdd::from_truth_table(&table).unwrap();
            for v in bdd.informative_vars() {
                assert!(
                    live_pos.contains(&(v as usize)),
                    "junk variable {v} survived (live at {live_pos:?})"
                );
            }
            assert_eq!(eval_all(&bdd, n), table);
        }
    }

    #[test]
    fn variable_order_changes_node_count_but_never_support() {
        // f = (x0 AND x1) OR (x2 AND x3) OR (x4 AND x5): linear-size with
        // paired variables adjacent, exponential when they are interleaved.
        let n = 6;
        let table: Vec<bool> = (0..1usize << n)
            .map(|r| {
                let b = |v: usize| r >> (n - 1 - v) & 1 == 1;
                (b(0) && b(1)) || (b(2) && b(3)) || (b(4) && b(5))
            })
            .collect();
        let adjacent = Bdd::from_truth_table(&table).unwrap();
        let interleaved =
            Bdd::from_truth_table_with_order(&table, &[0, 2, 4, 1, 3, 5]).unwrap();
        assert!(
            interleaved.node_count() > adjacent.node_count(),
            "{} vs {}",
            interleaved.node_count(),
            adjacent.node_count()
        );
        assert_eq!(adjacent.informative_vars(), interleaved.informative_vars());
        assert_eq!(eval_all(&adjacent, n), table);
        // Permuted diagrams still evaluate the original function.
        for row in 0..1usize << n {
            let assignment: Vec<bool> = (0..n).map(|v| row >> (n - 1 - v) & 1 == 1).collect();
            assert_eq!(interleaved.evaluate(&assignment), table[row]);
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(
            Bdd::from_truth_table(&[true, false, true]),
            Err(FeatselError::BadTableLength(3))
        ));
        assert!(matches!(Bdd::from_truth_table(&[]), Err(FeatselError::BadTableLength(0))));
        let table = vec![false; 4];
        assert!(Bdd::from_truth_table_with_order(&table, &[0, 0]).is_err());
        assert!(Bdd::from_truth_table_with_order(&table, &[0]).is_err());
    }

    #[test]
    fn dot_export_mentions_every_reachable_node() {
        let table: Vec<bool> = (0..8).map(|r| r & 0b100 != 0 && r & 0b001 != 0).collect();
        let bdd = Bdd::from_truth_table(&table).unwrap();
        let dot = bdd.to_dot(Some(&["alpha".into(), "beta".into(), "gamma".into()]));
        assert!(dot.contains("digraph bdd"));
        assert!(dot.contains("alpha"));
        assert!(dot.contains("gamma"));
        assert!(!dot.contains("beta"), "eliminated variable should not appear");
    }
}
