//! Compiling a rewriting system into circuits and circuit rewrite rules.
//!
//! A term `u` over an ordered variable context `xs` becomes a circuit
//! `translate_term(u, xs)`: a prefix of resource gates (erase unused
//! variables, duplicate repeated ones, reorder with crossings) feeding a pure
//! gate tree that mirrors `u`.  Each rewrite rule becomes a circuit rewrite
//! rule between the translations of its two sides.  On top of those
//! *computation* rules, two generated rule families keep resource gates
//! normalized: one family rewrites resource gates among themselves, the
//! other pushes crossings, duplications and erasures upward past every
//! operation gate.

use crate::circuit::{OnePath, Sort, StructClass, TwoCellDecl, TwoPath};
use crate::trs::{Rule, Signature, Term, Trs};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("variable {var} of {term} is not in the translation context")]
    UnknownVariable { term: String, var: String },
    #[error("translation context repeats variable {var}")]
    DuplicateContextVariable { var: String },
    #[error("unknown operation {op}")]
    UnknownOperation { op: String },
    #[error("term {term}: expected sort {expected}, found {found}")]
    SortMismatch {
        term: String,
        expected: String,
        found: String,
    },
    #[error("rule {rule} repeats variable {var} on the left; only left-linear rules translate to circuit rules")]
    NotLeftLinear { rule: String, var: String },
    #[error("selecting only one half of the gate-push rules requires a constructor/function program shape")]
    SplitRequiresFunctionalProgram,
}

/// The gate dictionary of a translated system: one algebra gate per
/// operation, one crossing per ordered sort pair, one duplication and one
/// erasure per sort.
#[derive(Clone, Debug)]
pub struct GateSet {
    sorts: Vec<Sort>,
    algebra: Vec<Arc<TwoCellDecl>>,
    swaps: BTreeMap<(Sort, Sort), Arc<TwoCellDecl>>,
    dups: BTreeMap<Sort, Arc<TwoCellDecl>>,
    erases: BTreeMap<Sort, Arc<TwoCellDecl>>,
}

impl GateSet {
    pub fn new(sig: &Signature) -> GateSet {
        let sorts: Vec<Sort> = sig.sorts().to_vec();
        let algebra = sig
            .ops()
            .iter()
            .map(|op| TwoCellDecl::algebra(op.name.clone(), op.inputs.clone(), op.output.clone()))
            .collect();
        let mut swaps = BTreeMap::new();
        let mut dups = BTreeMap::new();
        let mut erases = BTreeMap::new();
        for a in &sorts {
            for b in &sorts {
                swaps.insert((a.clone(), b.clone()), TwoCellDecl::swap(a.clone(), b.clone()));
            }
            dups.insert(a.clone(), TwoCellDecl::dup(a.clone()));
            erases.insert(a.clone(), TwoCellDecl::erase(a.clone()));
        }
        GateSet {
            sorts,
            algebra,
            swaps,
            dups,
            erases,
        }
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn algebra(&self) -> &[Arc<TwoCellDecl>] {
        &self.algebra
    }

    pub fn op(&self, name: &str) -> Option<&Arc<TwoCellDecl>> {
        self.algebra.iter().find(|c| c.name == name)
    }

    pub fn swap(&self, a: &Sort, b: &Sort) -> Arc<TwoCellDecl> {
        self.swaps[&(a.clone(), b.clone())].clone()
    }

    pub fn dup(&self, a: &Sort) -> Arc<TwoCellDecl> {
        self.dups[a].clone()
    }

    pub fn erase(&self, a: &Sort) -> Arc<TwoCellDecl> {
        self.erases[a].clone()
    }

    /// All resource gates, crossings first, in sort order.
    pub fn structure(&self) -> Vec<Arc<TwoCellDecl>> {
        self.swaps
            .values()
            .chain(self.dups.values())
            .chain(self.erases.values())
            .cloned()
            .collect()
    }

    /// Every gate: algebra gates in declaration order, then resource gates.
    pub fn all(&self) -> Vec<Arc<TwoCellDecl>> {
        self.algebra.iter().cloned().chain(self.structure()).collect()
    }
}

// ---------------------------------------------------------------------------
// Structure 2-paths by structural induction.
// ---------------------------------------------------------------------------

/// Duplicates a whole bundle: `x ⇒ x·x`, with the two copies in bundle
/// order.  Inductively, the head wire and the tail bundle are duplicated
/// side by side, then the inner two groups exchange places.
pub fn structure_dup(gates: &GateSet, x: &OnePath) -> TwoPath {
    match x.split_first() {
        None => TwoPath::identity(OnePath::empty()),
        Some((head, tail)) if tail.is_empty() => TwoPath::generator(gates.dup(&head)),
        Some((head, tail)) => {
            let top = TwoPath::generator(gates.dup(&head)).compose0(&structure_dup(gates, &tail));
            let fix = TwoPath::identity(OnePath::single(head.clone()))
                .compose0(&wire_over_path(gates, &head, &tail))
                .compose0(&TwoPath::identity(tail.clone()));
            top.compose1(&fix).expect("dup interfaces agree")
        }
    }
}

/// Erases a whole bundle: `x ⇒ (empty)`.
pub fn structure_erase(gates: &GateSet, x: &OnePath) -> TwoPath {
    x.iter().fold(TwoPath::identity(OnePath::empty()), |acc, s| {
        acc.compose0(&TwoPath::generator(gates.erase(s)))
    })
}

/// Moves one wire of sort `z` from the right end to the left across the
/// bundle `x`: `x·z ⇒ z·x`, as a chain of single crossings.
pub fn structure_swap(gates: &GateSet, x: &OnePath, z: &Sort) -> TwoPath {
    let mut acc = TwoPath::identity(x.concat(&OnePath::single(z.clone())));
    for i in (0..x.len()).rev() {
        let left: OnePath = x.as_slice()[..i].iter().cloned().collect();
        let right: OnePath = x.as_slice()[i + 1..].iter().cloned().collect();
        let layer = TwoPath::identity(left)
            .compose0(&TwoPath::generator(gates.swap(x.get(i).unwrap(), z)))
            .compose0(&TwoPath::identity(right));
        acc = acc.compose1(&layer).expect("swap chain interfaces agree");
    }
    acc
}

/// Moves one wire of sort `z` from the left end to the right across the
/// bundle `x`: `z·x ⇒ x·z`.
pub fn wire_over_path(gates: &GateSet, z: &Sort, x: &OnePath) -> TwoPath {
    let mut acc = TwoPath::identity(OnePath::single(z.clone()).concat(x));
    for i in 0..x.len() {
        let left: OnePath = x.as_slice()[..i].iter().cloned().collect();
        let right: OnePath = x.as_slice()[i + 1..].iter().cloned().collect();
        let layer = TwoPath::identity(left)
            .compose0(&TwoPath::generator(gates.swap(z, x.get(i).unwrap())))
            .compose0(&TwoPath::identity(right));
        acc = acc.compose1(&layer).expect("swap chain interfaces agree");
    }
    acc
}

// ---------------------------------------------------------------------------
// Term translation.
// ---------------------------------------------------------------------------

/// Translates term `u` over the ordered variable context `xs`.
///
/// The result consumes one wire per context variable (in order) and emits
/// one wire carrying `u`'s sort.  Unused variables are erased, repeated
/// variables duplicated, and wires reordered by crossings so that the pure
/// gate tree of `u` reads its inputs left to right.
pub fn translate_term(
    gates: &GateSet,
    u: &Term,
    xs: &[(String, Sort)],
) -> Result<TwoPath, TranslateError> {
    Ok(translate_term_tracked(gates, u, xs)?.0)
}

/// As [`translate_term`], also reporting, for every operation position of
/// `u`, the index of the node realizing it in the resulting circuit.
pub fn translate_term_tracked(
    gates: &GateSet,
    u: &Term,
    xs: &[(String, Sort)],
) -> Result<(TwoPath, BTreeMap<Vec<usize>, usize>), TranslateError> {
    {
        let mut seen = BTreeSet::new();
        for (name, _) in xs {
            if !seen.insert(name) {
                return Err(TranslateError::DuplicateContextVariable { var: name.clone() });
            }
        }
    }
    // Occurrences of context variables in u, left to right.
    let occurrences: Vec<usize> = u
        .var_occurrences()
        .into_iter()
        .map(|v| {
            xs.iter()
                .position(|(name, _)| name == v)
                .ok_or_else(|| TranslateError::UnknownVariable {
                    term: u.to_string(),
                    var: v.to_string(),
                })
        })
        .collect::<Result<_, _>>()?;
    let mut counts = vec![0usize; xs.len()];
    for &i in &occurrences {
        counts[i] += 1;
    }

    // Erase layer: remove variables with no occurrence.
    let mut erase_layer = TwoPath::identity(OnePath::empty());
    for (i, (_, sort)) in xs.iter().enumerate() {
        let piece = if counts[i] == 0 {
            TwoPath::generator(gates.erase(sort))
        } else {
            TwoPath::identity(OnePath::single(sort.clone()))
        };
        erase_layer = erase_layer.compose0(&piece);
    }

    // Duplication layer: fan each surviving variable out to its copy count,
    // as a right-leaning comb producing adjacent copies.
    let mut dup_layer = TwoPath::identity(OnePath::empty());
    for (i, (_, sort)) in xs.iter().enumerate() {
        if counts[i] == 0 {
            continue;
        }
        dup_layer = dup_layer.compose0(&copy_comb(gates, sort, counts[i]));
    }

    // Crossing network: wires currently carry (variable, copy) grouped by
    // variable; the gate tree wants them in occurrence order, with copies of
    // one variable assigned in occurrence order (so equal copies never
    // cross).  Sort by repeatedly bringing the next wanted wire leftward.
    let mut current: Vec<(usize, usize)> = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        for copy in 0..c {
            current.push((i, copy));
        }
    }
    let wanted: Vec<(usize, usize)> = {
        let mut next_copy = vec![0usize; xs.len()];
        occurrences
            .iter()
            .map(|&i| {
                let copy = next_copy[i];
                next_copy[i] += 1;
                (i, copy)
            })
            .collect()
    };
    let sort_of = |w: &(usize, usize)| xs[w.0].1.clone();
    let mut swap_net = TwoPath::identity(current.iter().map(&sort_of).collect());
    for i in 0..wanted.len() {
        let mut j = current
            .iter()
            .position(|w| *w == wanted[i])
            .expect("every wanted wire exists");
        while j > i {
            let left: OnePath = current[..j - 1].iter().map(&sort_of).collect();
            let right: OnePath = current[j + 1..].iter().map(&sort_of).collect();
            let layer = TwoPath::identity(left)
                .compose0(&TwoPath::generator(
                    gates.swap(&sort_of(&current[j - 1]), &sort_of(&current[j])),
                ))
                .compose0(&TwoPath::identity(right));
            swap_net = swap_net.compose1(&layer).expect("crossing interfaces agree");
            current.swap(j - 1, j);
            j -= 1;
        }
    }

    let prefix = erase_layer
        .compose1(&dup_layer)
        .expect("erase feeds dup")
        .compose1(&swap_net)
        .expect("dup feeds crossings");

    let (tree, tree_positions) = gate_tree(gates, u, &xs_sorts(xs), &mut Vec::new())?;
    let offset = prefix.node_count();
    let full = prefix.compose1(&tree).expect("prefix feeds the gate tree");
    let positions = tree_positions
        .into_iter()
        .map(|(pos, node)| (pos, node + offset))
        .collect();
    Ok((full, positions))
}

fn xs_sorts(xs: &[(String, Sort)]) -> BTreeMap<&str, Sort> {
    xs.iter().map(|(n, s)| (n.as_str(), s.clone())).collect()
}

/// Fans one wire out to `k >= 1` adjacent copies.
fn copy_comb(gates: &GateSet, sort: &Sort, k: usize) -> TwoPath {
    let mut acc = TwoPath::identity(OnePath::single(sort.clone()));
    for produced in 1..k {
        // One more copy: duplicate the last wire of the current bundle.
        let left = TwoPath::identity(
            std::iter::repeat(sort.clone())
                .take(produced - 1)
                .collect::<OnePath>(),
        );
        let layer = left.compose0(&TwoPath::generator(gates.dup(sort)));
        acc = acc.compose1(&layer).expect("comb interfaces agree");
    }
    acc
}

/// The pure gate tree of `u`, consuming one wire per variable occurrence in
/// left-to-right order.  Also returns the node index of every operation
/// position.
fn gate_tree(
    gates: &GateSet,
    u: &Term,
    var_sorts: &BTreeMap<&str, Sort>,
    pos: &mut Vec<usize>,
) -> Result<(TwoPath, BTreeMap<Vec<usize>, usize>), TranslateError> {
    match u {
        Term::Var(x) => {
            let sort = var_sorts
                .get(x.as_str())
                .ok_or_else(|| TranslateError::UnknownVariable {
                    term: u.to_string(),
                    var: x.clone(),
                })?;
            Ok((
                TwoPath::identity(OnePath::single(sort.clone())),
                BTreeMap::new(),
            ))
        }
        Term::App(op, args) => {
            let cell = gates
                .op(op)
                .ok_or_else(|| TranslateError::UnknownOperation { op: op.clone() })?
                .clone();
            let mut juxt = TwoPath::identity(OnePath::empty());
            let mut positions = BTreeMap::new();
            for (i, arg) in args.iter().enumerate() {
                pos.push(i);
                let (part, part_positions) = gate_tree(gates, arg, var_sorts, pos)?;
                pos.pop();
                let offset = juxt.node_count();
                positions.extend(
                    part_positions
                        .into_iter()
                        .map(|(p, node)| (p, node + offset)),
                );
                juxt = juxt.compose0(&part);
            }
            if juxt.target() != &cell.source {
                return Err(TranslateError::SortMismatch {
                    term: u.to_string(),
                    expected: cell.source.to_string(),
                    found: juxt.target().to_string(),
                });
            }
            let node = juxt.node_count();
            let full = juxt
                .compose1(&TwoPath::generator(cell))
                .expect("interface checked above");
            positions.insert(pos.clone(), node);
            Ok((full, positions))
        }
    }
}

/// Which resource gate shapes the translated sides of the rules need.
pub fn used_structure(trs: &Trs) -> BTreeSet<StructClass> {
    let gates = GateSet::new(trs.signature());
    let mut used = BTreeSet::new();
    for rule in trs.rules() {
        let xs = rule_context(trs, rule);
        for side in [&rule.lhs, &rule.rhs] {
            let circuit =
                translate_term(&gates, side, &xs).expect("validated rules always translate");
            for node in circuit.nodes() {
                if let Some(class) = node.cell.kind.struct_class() {
                    used.insert(class);
                }
            }
        }
    }
    used
}

/// The translation context of a rule: left-hand-side variables in
/// left-to-right order, with their inferred sorts.
pub fn rule_context(trs: &Trs, rule: &Rule) -> Vec<(String, Sort)> {
    let sorts = trs.rule_var_sorts(rule);
    rule.lhs
        .vars_in_order()
        .into_iter()
        .map(|v| (v.to_string(), sorts[v].clone()))
        .collect()
}

// ---------------------------------------------------------------------------
// Circuit rewrite rules.
// ---------------------------------------------------------------------------

/// Which generated family a circuit rewrite rule belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum CellFamily {
    /// Translation of an original rewrite rule.
    Computation,
    /// Interaction of resource gates with each other.
    StructureLaw,
    /// Pushing a resource gate upward past a constructor gate.
    ConstructorPush,
    /// Pushing a resource gate upward past a function gate.
    FunctionPush,
}

impl fmt::Display for CellFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellFamily::Computation => f.write_str("computation"),
            CellFamily::StructureLaw => f.write_str("structure-law"),
            CellFamily::ConstructorPush => f.write_str("constructor-push"),
            CellFamily::FunctionPush => f.write_str("function-push"),
        }
    }
}

/// A circuit rewrite rule.
#[derive(Clone, Debug)]
pub struct ThreeCell {
    pub name: String,
    pub source: TwoPath,
    pub target: TwoPath,
    pub family: CellFamily,
    /// For gate-push rules: the operation being pushed past.
    pub op: Option<String>,
    /// For gate-push rules: the resource gate shape being pushed.
    pub concerns: Option<StructClass>,
}

impl ThreeCell {
    fn new(name: String, source: TwoPath, target: TwoPath, family: CellFamily) -> ThreeCell {
        assert_eq!(source.source(), target.source(), "rule {name}: shared input interface");
        assert_eq!(source.target(), target.target(), "rule {name}: shared output interface");
        ThreeCell {
            name,
            source,
            target,
            family,
            op: None,
            concerns: None,
        }
    }
}

/// One circuit rule per term rule: both sides translated over the
/// left-hand-side variable context.
pub fn gen_computation(gates: &GateSet, trs: &Trs) -> Result<Vec<ThreeCell>, TranslateError> {
    let mut cells = Vec::new();
    for rule in trs.rules() {
        if let Some((var, _)) = rule
            .lhs
            .var_counts()
            .into_iter()
            .find(|(_, c)| *c > 1)
        {
            return Err(TranslateError::NotLeftLinear {
                rule: rule.name.clone(),
                var: var.to_string(),
            });
        }
        let xs = rule_context(trs, rule);
        let source = translate_term(gates, &rule.lhs, &xs)?;
        let target = translate_term(gates, &rule.rhs, &xs)?;
        cells.push(ThreeCell::new(
            rule.name.clone(),
            source,
            target,
            CellFamily::Computation,
        ));
    }
    Ok(cells)
}

/// The gate-push rules for one operation gate: for every sort, a crossing
/// entering from either side is pushed above the gate; a duplication below
/// the gate becomes a duplication of all inputs feeding two gate copies; an
/// erasure below the gate erases all inputs.  Exactly `2·|sorts| + 2` rules.
pub fn gen_delta2(
    gates: &GateSet,
    op: &Arc<TwoCellDecl>,
    functions: &BTreeSet<String>,
) -> Vec<ThreeCell> {
    let family = if functions.contains(&op.name) {
        CellFamily::FunctionPush
    } else {
        CellFamily::ConstructorPush
    };
    let sigma = op.source.clone();
    let out = op
        .target
        .get(0)
        .expect("operation gates have exactly one output")
        .clone();
    let phi = TwoPath::generator(op.clone());
    let mut cells = Vec::new();
    for z in gates.sorts() {
        let idz = TwoPath::identity(OnePath::single(z.clone()));
        // Gate on the left, crossing after: push the crossing above.
        let source = phi
            .compose0(&idz)
            .compose1(&TwoPath::generator(gates.swap(&out, z)))
            .expect("push rule source");
        let target = structure_swap(gates, &sigma, z)
            .compose1(&idz.compose0(&phi))
            .expect("push rule target");
        let mut cell = ThreeCell::new(
            format!("swap_r({},{z})", op.name),
            source,
            target,
            family,
        );
        cell.op = Some(op.name.clone());
        cell.concerns = Some(StructClass::Swap);
        cells.push(cell);
        // Gate on the right, crossing after: mirror image.
        let source = idz
            .compose0(&phi)
            .compose1(&TwoPath::generator(gates.swap(z, &out)))
            .expect("push rule source");
        let target = wire_over_path(gates, z, &sigma)
            .compose1(&phi.compose0(&idz))
            .expect("push rule target");
        let mut cell = ThreeCell::new(
            format!("swap_l({},{z})", op.name),
            source,
            target,
            family,
        );
        cell.op = Some(op.name.clone());
        cell.concerns = Some(StructClass::Swap);
        cells.push(cell);
    }
    let source = phi
        .compose1(&TwoPath::generator(gates.dup(&out)))
        .expect("dup rule source");
    let target = structure_dup(gates, &sigma)
        .compose1(&phi.compose0(&phi))
        .expect("dup rule target");
    let mut cell = ThreeCell::new(format!("dup({})", op.name), source, target, family);
    cell.op = Some(op.name.clone());
    cell.concerns = Some(StructClass::Dup);
    cells.push(cell);
    let source = phi
        .compose1(&TwoPath::generator(gates.erase(&out)))
        .expect("erase rule source");
    let target = structure_erase(gates, &sigma);
    let mut cell = ThreeCell::new(format!("erase({})", op.name), source, target, family);
    cell.op = Some(op.name.clone());
    cell.concerns = Some(StructClass::Erase);
    cells.push(cell);
    cells
}

/// Gate-push rules for every operation gate; `2n(m+1)` cells in total.
pub fn gen_delta2_all(gates: &GateSet, functions: &BTreeSet<String>) -> Vec<ThreeCell> {
    let cells: Vec<ThreeCell> = gates
        .algebra()
        .iter()
        .flat_map(|op| gen_delta2(gates, op, functions))
        .collect();
    let n = gates.algebra().len();
    let m = gates.sorts().len();
    assert_eq!(cells.len(), 2 * n * (m + 1), "gate-push rule count");
    cells
}

/// The resource-gate interaction rules: crossing involution and rotation,
/// duplication associativity and commutativity, the two counits, and the
/// commutations of duplication/erasure past crossings.  The total count is
/// `m^3 + 6m^2 + 5m` for `m` sorts, enforced by assertion.
pub fn gen_delta1(gates: &GateSet) -> Vec<ThreeCell> {
    let mut cells = Vec::new();
    let sorts = gates.sorts().to_vec();
    let id = |s: &Sort| TwoPath::identity(OnePath::single(s.clone()));
    let sw = |a: &Sort, b: &Sort| TwoPath::generator(gates.swap(a, b));
    let dup = |a: &Sort| TwoPath::generator(gates.dup(a));
    let er = |a: &Sort| TwoPath::generator(gates.erase(a));

    for a in &sorts {
        for b in &sorts {
            for c in &sorts {
                // Rotating a triple crossing: left-leaning to right-leaning.
                let source = sw(a, b)
                    .compose0(&id(c))
                    .compose1(&id(b).compose0(&sw(a, c)))
                    .unwrap()
                    .compose1(&sw(b, c).compose0(&id(a)))
                    .unwrap();
                let target = id(a)
                    .compose0(&sw(b, c))
                    .compose1(&sw(a, c).compose0(&id(b)))
                    .unwrap()
                    .compose1(&id(c).compose0(&sw(a, b)))
                    .unwrap();
                cells.push(ThreeCell::new(
                    format!("yang_baxter({a},{b},{c})"),
                    source,
                    target,
                    CellFamily::StructureLaw,
                ));
            }
        }
    }
    for a in &sorts {
        for b in &sorts {
            let ab = OnePath::from_sorts(vec![a.clone(), b.clone()]);
            // Double crossing cancels.
            cells.push(ThreeCell::new(
                format!("swap_invol({a},{b})"),
                sw(a, b).compose1(&sw(b, a)).unwrap(),
                TwoPath::identity(ab.clone()),
                CellFamily::StructureLaw,
            ));
            // Duplication after a crossing, on the wire now on the left.
            let source = sw(a, b).compose1(&dup(b).compose0(&id(a))).unwrap();
            let target = id(a)
                .compose0(&dup(b))
                .compose1(&sw(a, b).compose0(&id(b)))
                .unwrap()
                .compose1(&id(b).compose0(&sw(a, b)))
                .unwrap();
            cells.push(ThreeCell::new(
                format!("dup_swap_l({a},{b})"),
                source,
                target,
                CellFamily::StructureLaw,
            ));
            // Duplication after a crossing, on the wire now on the right.
            let source = sw(a, b).compose1(&id(b).compose0(&dup(a))).unwrap();
            let target = dup(a)
                .compose0(&id(b))
                .compose1(&id(a).compose0(&sw(a, b)))
                .unwrap()
                .compose1(&sw(a, b).compose0(&id(a)))
                .unwrap();
            cells.push(ThreeCell::new(
                format!("dup_swap_r({a},{b})"),
                source,
                target,
                CellFamily::StructureLaw,
            ));
            // Erasure after a crossing, three input patterns.
            cells.push(ThreeCell::new(
                format!("erase_swap_l({a},{b})"),
                sw(a, b).compose1(&er(b).compose0(&id(a))).unwrap(),
                id(a).compose0(&er(b)),
                CellFamily::StructureLaw,
            ));
            cells.push(ThreeCell::new(
                format!("erase_swap_r({a},{b})"),
                sw(a, b).compose1(&id(b).compose0(&er(a))).unwrap(),
                er(a).compose0(&id(b)),
                CellFamily::StructureLaw,
            ));
            cells.push(ThreeCell::new(
                format!("erase_swap_pair({a},{b})"),
                sw(a, b).compose1(&er(b).compose0(&er(a))).unwrap(),
                er(a).compose0(&er(b)),
                CellFamily::StructureLaw,
            ));
        }
    }
    for a in &sorts {
        // Left-leaning duplication comb becomes right-leaning.
        cells.push(ThreeCell::new(
            format!("dup_assoc({a})"),
            dup(a).compose1(&dup(a).compose0(&id(a))).unwrap(),
            dup(a).compose1(&id(a).compose0(&dup(a))).unwrap(),
            CellFamily::StructureLaw,
        ));
        // Crossing the two copies changes nothing.
        cells.push(ThreeCell::new(
            format!("dup_comm({a})"),
            dup(a).compose1(&sw(a, a)).unwrap(),
            dup(a),
            CellFamily::StructureLaw,
        ));
        // Erasing either copy undoes the duplication.
        cells.push(ThreeCell::new(
            format!("counit_l({a})"),
            dup(a).compose1(&er(a).compose0(&id(a))).unwrap(),
            id(a),
            CellFamily::StructureLaw,
        ));
        cells.push(ThreeCell::new(
            format!("counit_r({a})"),
            dup(a).compose1(&id(a).compose0(&er(a))).unwrap(),
            id(a),
            CellFamily::StructureLaw,
        ));
        cells.push(ThreeCell::new(
            format!("erase_dup({a})"),
            dup(a).compose1(&er(a).compose0(&er(a))).unwrap(),
            er(a),
            CellFamily::StructureLaw,
        ));
    }
    let m = sorts.len();
    assert_eq!(cells.len(), m * (m * m + 6 * m + 5), "resource rule count");
    cells
}

// ---------------------------------------------------------------------------
// Polygraph assembly.
// ---------------------------------------------------------------------------

/// Which generated rule families to include when assembling a polygraph.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CellSelection {
    pub computation: bool,
    pub structure_law: bool,
    pub constructor_push: bool,
    pub function_push: bool,
    /// Restrict gate-push rules to those concerning these resource shapes.
    pub push_filter: Option<BTreeSet<StructClass>>,
}

impl CellSelection {
    /// Everything: computation, resource laws, all gate pushes.
    pub fn full() -> Self {
        CellSelection {
            computation: true,
            structure_law: true,
            constructor_push: true,
            function_push: true,
            push_filter: None,
        }
    }

    /// Computation rules only.
    pub fn computation_only() -> Self {
        CellSelection {
            computation: true,
            structure_law: false,
            constructor_push: false,
            function_push: false,
            push_filter: None,
        }
    }

    /// Computation plus constructor pushes: the program shape.
    pub fn program() -> Self {
        CellSelection {
            computation: true,
            structure_law: false,
            constructor_push: true,
            function_push: false,
            push_filter: None,
        }
    }

    /// Computation plus every gate push (no resource laws).
    pub fn general() -> Self {
        CellSelection {
            computation: true,
            structure_law: false,
            constructor_push: true,
            function_push: true,
            push_filter: None,
        }
    }

    /// Computation plus gate pushes restricted to the given resource shapes.
    pub fn partial(used: BTreeSet<StructClass>) -> Self {
        CellSelection {
            computation: true,
            structure_law: false,
            constructor_push: true,
            function_push: true,
            push_filter: Some(used),
        }
    }
}

/// A translated system: the gate dictionary plus the selected circuit rules.
#[derive(Clone, Debug)]
pub struct Polygraph {
    pub gates: GateSet,
    pub cells: Vec<ThreeCell>,
}

impl Polygraph {
    pub fn cells_in_family(&self, family: CellFamily) -> impl Iterator<Item = &ThreeCell> {
        self.cells.iter().filter(move |c| c.family == family)
    }

    pub fn cell(&self, name: &str) -> Option<&ThreeCell> {
        self.cells.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "gates": self.gates.all().iter().map(|g| serde_json::json!({
                "name": g.name,
                "inputs": g.source.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
                "outputs": g.target.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "cells": self.cells.iter().map(|c| serde_json::json!({
                "name": c.name,
                "family": c.family.to_string(),
                "source": c.source.to_json(),
                "target": c.target.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Assembles the translation of `trs` with the requested rule families.
pub fn build_polygraph(trs: &Trs, selection: &CellSelection) -> Result<Polygraph, TranslateError> {
    let gates = GateSet::new(trs.signature());
    let class = crate::trs::classify::classify(trs);
    if selection.constructor_push != selection.function_push && !class.functional_program {
        return Err(TranslateError::SplitRequiresFunctionalProgram);
    }
    let mut cells = Vec::new();
    if selection.computation {
        cells.extend(gen_computation(&gates, trs)?);
    }
    if selection.structure_law {
        cells.extend(gen_delta1(&gates));
    }
    if selection.constructor_push || selection.function_push {
        let pushes = gen_delta2_all(&gates, &class.functions);
        cells.extend(pushes.into_iter().filter(|c| {
            let wanted_half = match c.family {
                CellFamily::ConstructorPush => selection.constructor_push,
                CellFamily::FunctionPush => selection.function_push,
                _ => unreachable!("gate pushes only"),
            };
            let wanted_shape = selection
                .push_filter
                .as_ref()
                .map(|f| f.contains(&c.concerns.expect("gate pushes carry a shape")))
                .unwrap_or(true);
            wanted_half && wanted_shape
        }));
    }
    Ok(Polygraph { gates, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CellKind;
    use crate::trs::parse::parse_trs;

    fn division() -> Trs {
        parse_trs(
            "(VAR x y)
             (RULES
               M(0,x) -> 0
               M(x,0) -> x
               M(s(x),s(y)) -> M(x,y)
               Q(0,x) -> 0
               Q(s(x),y) -> s(Q(M(x,y),y))
             )",
        )
        .unwrap()
    }

    fn o() -> Sort {
        Sort::new("o")
    }

    fn ctx(names: &[&str]) -> Vec<(String, Sort)> {
        names.iter().map(|n| (n.to_string(), o())).collect()
    }

    fn count_kind(path: &TwoPath, pred: impl Fn(&CellKind) -> bool) -> usize {
        path.nodes().iter().filter(|n| pred(&n.cell.kind)).count()
    }

    #[test]
    fn unused_variable_is_erased() {
        let trs = division();
        let gates = GateSet::new(trs.signature());
        let u = Term::app("s", vec![Term::var("x")]);
        let c = translate_term(&gates, &u, &ctx(&["x", "y"])).unwrap();
        assert_eq!(c.source().len(), 2);
        assert_eq!(c.target().len(), 1);
        assert_eq!(count_kind(&c, |k| matches!(k, CellKind::Erase(_))), 1);
        assert_eq!(count_kind(&c, |k| matches!(k, CellKind::Algebra)), 1);
        assert_eq!(count_kind(&c, |k| matches!(k, CellKind::Swap(_, _))), 0);
    }

    #[test]
    fn repeated_variable_is_duplicated() {
        let trs = parse_trs("(VAR x) (RULES A(x,x) -> x)").unwrap();
        let gates = GateSet::new(trs.signature());
        let u = Term::app("A", vec![Term::var("x"), Term::var("x")]);
        let c = translate_term(&gates, &u, &ctx(&["x"])).unwrap();
        assert_eq!(count_kind(&c, |k| matches!(k, CellKind::Dup(_))), 1);
        assert_eq!(count_kind(&c, |k| matches!(k, CellKind::Swap(_, _))), 0);
    }

    #[test]
    fn inverted_variables_need_a_crossing() {
        let trs = parse_trs("(VAR x y) (RULES A(x,y) -> A(y,x))").unwrap();
        let gates = GateSet::new(trs.signature());
        let u = Term::app("A", vec![Term::var("x"), Term::var("y")]);
        let c = translate_term(&gates, &u, &ctx(&["y", "x"])).unwrap();
        assert_eq!(count_kind(&c, |k| matches!(k, CellKind::Swap(_, _))), 1);
        let straight = translate_term(&gates, &u, &ctx(&["x", "y"])).unwrap();
        assert!(!c.eq_mod_deformation(&straight));
    }

    #[test]
    fn structure_paths_have_expected_interfaces() {
        let trs = division();
        let gates = GateSet::new(trs.signature());
        assert_eq!(
            structure_dup(&gates, &OnePath::empty()).node_count(),
            0
        );
        let single = structure_dup(&gates, &OnePath::single(o()));
        assert_eq!(single.node_count(), 1);
        let pair = OnePath::from_sorts(vec![o(), o()]);
        let d = structure_dup(&gates, &pair);
        assert_eq!(d.source(), &pair);
        assert_eq!(d.target(), &pair.concat(&pair));
        assert_eq!(count_kind(&d, |k| matches!(k, CellKind::Dup(_))), 2);
        assert_eq!(count_kind(&d, |k| matches!(k, CellKind::Swap(_, _))), 1);
        let s = structure_swap(&gates, &pair, &o());
        assert_eq!(s.node_count(), 2);
        assert_eq!(s.source().len(), 3);
        let e = structure_erase(&gates, &pair);
        assert_eq!(e.node_count(), 2);
        assert!(e.target().is_empty());
    }

    #[test]
    fn computation_cells_for_division() {
        let trs = division();
        let gates = GateSet::new(trs.signature());
        let cells = gen_computation(&gates, &trs).unwrap();
        assert_eq!(cells.len(), 5);
        // Left sides of left-linear rules carry no resource gates.
        for cell in &cells {
            assert_eq!(
                cell.source
                    .nodes()
                    .iter()
                    .filter(|n| n.cell.is_structure())
                    .count(),
                0
            );
        }
        // Last rule copies y: its right side contains exactly one dup.
        let last = &cells[4];
        assert_eq!(
            last.target
                .nodes()
                .iter()
                .filter(|n| matches!(n.cell.kind, CellKind::Dup(_)))
                .count(),
            1
        );
    }

    #[test]
    fn non_left_linear_rules_are_rejected() {
        let trs = parse_trs("(VAR x) (RULES A(x,x) -> x)").unwrap();
        let gates = GateSet::new(trs.signature());
        let err = gen_computation(&gates, &trs).unwrap_err();
        assert!(matches!(err, TranslateError::NotLeftLinear { .. }));
    }

    #[test]
    fn push_rule_counts_and_shapes() {
        let trs = division();
        let gates = GateSet::new(trs.signature());
        let functions = BTreeSet::from(["M".to_string(), "Q".to_string()]);
        let q = gates.op("Q").unwrap().clone();
        let cells = gen_delta2(&gates, &q, &functions);
        assert_eq!(cells.len(), 4);
        assert!(cells.iter().all(|c| c.family == CellFamily::FunctionPush));
        let dup_rule = cells.iter().find(|c| c.name == "dup(Q)").unwrap();
        assert_eq!(
            dup_rule
                .target
                .nodes()
                .iter()
                .filter(|n| n.cell.name == "Q")
                .count(),
            2
        );
        // Its target duplicates both inputs: two dups plus one crossing.
        assert_eq!(
            dup_rule
                .target
                .nodes()
                .iter()
                .filter(|n| matches!(n.cell.kind, CellKind::Dup(_)))
                .count(),
            2
        );
        let all = gen_delta2_all(&gates, &functions);
        assert_eq!(all.len(), 16);
    }

    #[test]
    fn erase_rule_for_a_constant_erases_nothing() {
        let trs = division();
        let gates = GateSet::new(trs.signature());
        let zero = gates.op("0").unwrap().clone();
        let cells = gen_delta2(&gates, &zero, &BTreeSet::new());
        let erase_rule = cells.iter().find(|c| c.name == "erase(0)").unwrap();
        assert_eq!(erase_rule.target.node_count(), 0);
        assert!(erase_rule.target.source().is_empty());
    }

    #[test]
    fn resource_law_counts() {
        let trs = division();
        let gates = GateSet::new(trs.signature());
        assert_eq!(gen_delta1(&gates).len(), 12);
        let two_sorts = parse_trs(
            r#"{"sorts": ["a", "b"],
                "ops": [{"name": "f", "inputs": ["a"], "output": "b"}],
                "rules": []}"#,
        )
        .unwrap();
        let gates2 = GateSet::new(two_sorts.signature());
        assert_eq!(gen_delta1(&gates2).len(), 42);
    }

    #[test]
    fn polygraph_counts_for_division() {
        let trs = division();
        let full = build_polygraph(&trs, &CellSelection::full()).unwrap();
        assert_eq!(full.cells.len(), 33);
        let program = build_polygraph(&trs, &CellSelection::program()).unwrap();
        assert_eq!(program.cells.len(), 13);
        let general = build_polygraph(&trs, &CellSelection::general()).unwrap();
        assert_eq!(general.cells.len(), 21);
    }

    #[test]
    fn double_computation_only() {
        let trs = parse_trs("(VAR x) (RULES D(0) -> 0  D(s(x)) -> s(s(D(x))))").unwrap();
        let p = build_polygraph(&trs, &CellSelection::computation_only()).unwrap();
        assert_eq!(p.cells.len(), 2);
        // Second rule: source is s then D; target is D then s then s.
        let cell = &p.cells[1];
        assert_eq!(cell.source.node_count(), 2);
        assert_eq!(cell.target.node_count(), 3);
        assert!(cell.source.nodes().iter().all(|n| !n.cell.is_structure()));
        assert!(cell.target.nodes().iter().all(|n| !n.cell.is_structure()));
    }

    #[test]
    fn split_selection_requires_program_shape() {
        let trs = parse_trs("(VAR x) (RULES f(g(x)) -> x  g(x) -> x)").unwrap();
        let err = build_polygraph(&trs, &CellSelection::program()).unwrap_err();
        assert_eq!(err, TranslateError::SplitRequiresFunctionalProgram);
    }

    #[test]
    fn division_uses_dup_and_erase_only() {
        let used = used_structure(&division());
        assert_eq!(
            used,
            BTreeSet::from([StructClass::Dup, StructClass::Erase])
        );
    }

    #[test]
    fn tracked_positions_point_at_matching_gates() {
        let trs = division();
        let gates = GateSet::new(trs.signature());
        let u = Term::app(
            "Q",
            vec![
                Term::app("M", vec![Term::var("x"), Term::var("y")]),
                Term::app("s", vec![Term::var("y")]),
            ],
        );
        let (c, positions) = translate_term_tracked(&gates, &u, &ctx(&["x", "y"])).unwrap();
        assert_eq!(positions.len(), 3);
        assert_eq!(c.nodes()[positions[&vec![]]].cell.name, "Q");
        assert_eq!(c.nodes()[positions[&vec![0]]].cell.name, "M");
        assert_eq!(c.nodes()[positions[&vec![1]]].cell.name, "s");
    }
}
