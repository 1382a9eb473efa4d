//! Acyclic gate networks with ordered wire interfaces.
//!
//! A [`TwoPath`] is a circuit: a finite set of gates ([`TwoCellDecl`]
//! instances) wired into an acyclic port network with an ordered list of
//! global input wires and an ordered list of global output wires.  Wires are
//! linear: every produced wire (a global input or a gate output port) is
//! consumed exactly once (by a gate input port or a global output).
//! Crossings are never implicit; any permutation of wires is realized by
//! explicit `swap` gates, so every circuit built by the two composition
//! operations admits a planar layered drawing.
//!
//! Two circuits are considered equal when one can be deformed into the other
//! without tearing wires, which for these networks coincides with
//! interface-preserving port-graph isomorphism; see [`TwoPath::eq_mod_deformation`].

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// A wire label.  Circuits are typed: every wire carries a sort.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sort(String);

impl Sort {
    pub fn new(name: impl Into<String>) -> Self {
        Sort(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sort({})", self.0)
    }
}

/// A finite sequence of sorts: the type of a circuit interface.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct OnePath(Vec<Sort>);

impl OnePath {
    pub fn empty() -> Self {
        OnePath(Vec::new())
    }

    pub fn single(sort: Sort) -> Self {
        OnePath(vec![sort])
    }

    pub fn from_sorts(sorts: Vec<Sort>) -> Self {
        OnePath(sorts)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Sort> {
        self.0.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Sort> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Sort] {
        &self.0
    }

    pub fn concat(&self, other: &OnePath) -> OnePath {
        let mut sorts = self.0.clone();
        sorts.extend(other.0.iter().cloned());
        OnePath(sorts)
    }

    /// Splits off the last sort, if any.
    pub fn split_last(&self) -> Option<(OnePath, Sort)> {
        let (last, init) = self.0.split_last()?;
        Some((OnePath(init.to_vec()), last.clone()))
    }

    /// Splits off the first sort, if any.
    pub fn split_first(&self) -> Option<(Sort, OnePath)> {
        let (first, tail) = self.0.split_first()?;
        Some((first.clone(), OnePath(tail.to_vec())))
    }
}

impl fmt::Display for OnePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for OnePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromIterator<Sort> for OnePath {
    fn from_iter<T: IntoIterator<Item = Sort>>(iter: T) -> Self {
        OnePath(iter.into_iter().collect())
    }
}

/// The three resource-management gate shapes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum StructClass {
    /// Crossing of two wires.
    Swap,
    /// Duplication of a wire.
    Dup,
    /// Erasure of a wire.
    Erase,
}

impl fmt::Display for StructClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructClass::Swap => f.write_str("swap"),
            StructClass::Dup => f.write_str("dup"),
            StructClass::Erase => f.write_str("erase"),
        }
    }
}

/// What kind of gate a declaration introduces.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum CellKind {
    /// An operation gate from the rewriting signature.
    Algebra,
    /// `swap(a,b) : a b => b a`
    Swap(Sort, Sort),
    /// `dup(a) : a => a a`
    Dup(Sort),
    /// `erase(a) : a => (empty)`
    Erase(Sort),
}

impl CellKind {
    pub fn struct_class(&self) -> Option<StructClass> {
        match self {
            CellKind::Algebra => None,
            CellKind::Swap(_, _) => Some(StructClass::Swap),
            CellKind::Dup(_) => Some(StructClass::Dup),
            CellKind::Erase(_) => Some(StructClass::Erase),
        }
    }
}

/// A gate declaration: name, input wire sorts and output wire sorts.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TwoCellDecl {
    pub name: String,
    pub source: OnePath,
    pub target: OnePath,
    pub kind: CellKind,
}

impl TwoCellDecl {
    pub fn algebra(name: impl Into<String>, inputs: Vec<Sort>, output: Sort) -> Arc<Self> {
        Arc::new(TwoCellDecl {
            name: name.into(),
            source: OnePath::from_sorts(inputs),
            target: OnePath::single(output),
            kind: CellKind::Algebra,
        })
    }

    pub fn swap(a: Sort, b: Sort) -> Arc<Self> {
        Arc::new(TwoCellDecl {
            name: format!("swap({a},{b})"),
            source: OnePath::from_sorts(vec![a.clone(), b.clone()]),
            target: OnePath::from_sorts(vec![b.clone(), a.clone()]),
            kind: CellKind::Swap(a, b),
        })
    }

    pub fn dup(a: Sort) -> Arc<Self> {
        Arc::new(TwoCellDecl {
            name: format!("dup({a})"),
            source: OnePath::single(a.clone()),
            target: OnePath::from_sorts(vec![a.clone(), a.clone()]),
            kind: CellKind::Dup(a),
        })
    }

    pub fn erase(a: Sort) -> Arc<Self> {
        Arc::new(TwoCellDecl {
            name: format!("erase({a})"),
            source: OnePath::single(a.clone()),
            target: OnePath::empty(),
            kind: CellKind::Erase(a),
        })
    }

    pub fn arity(&self) -> usize {
        self.source.len()
    }

    pub fn coarity(&self) -> usize {
        self.target.len()
    }

    pub fn is_structure(&self) -> bool {
        self.kind.struct_class().is_some()
    }
}

/// The producer of a wire: a global input or a gate output port.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum WireSrc {
    Input(usize),
    Node(usize, usize),
}

impl WireSrc {
    fn token(&self) -> String {
        match self {
            WireSrc::Input(i) => format!("g{i}"),
            WireSrc::Node(n, p) => format!("n{n}.{p}"),
        }
    }
}

/// The consumer of a wire: a gate input port or a global output.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WireDst {
    Output(usize),
    Node(usize, usize),
}

/// A gate instance inside a circuit, with a producer for each input port.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NodeData {
    pub cell: Arc<TwoCellDecl>,
    pub inputs: Vec<WireSrc>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("interface mismatch: cannot plug {found} into {expected}")]
    InterfaceMismatch { expected: OnePath, found: OnePath },
}

/// An acyclic circuit with ordered global interfaces.
///
/// Nodes are stored in a topological order (every input reference points to
/// an earlier node or a global input); all constructors preserve this.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TwoPath {
    source: OnePath,
    target: OnePath,
    nodes: Vec<NodeData>,
    outputs: Vec<WireSrc>,
}

/// Wire consumers, indexed by producer.
pub(crate) struct Consumers {
    pub of_input: Vec<WireDst>,
    pub of_node: Vec<Vec<WireDst>>,
}

impl TwoPath {
    /// The identity circuit on `path`: bare wires, no gates.
    pub fn identity(path: OnePath) -> TwoPath {
        let outputs = (0..path.len()).map(WireSrc::Input).collect();
        let p = TwoPath {
            source: path.clone(),
            target: path,
            nodes: Vec::new(),
            outputs,
        };
        p.assert_valid();
        p
    }

    /// The circuit consisting of a single gate.
    pub fn generator(cell: Arc<TwoCellDecl>) -> TwoPath {
        let inputs = (0..cell.arity()).map(WireSrc::Input).collect();
        let outputs = (0..cell.coarity()).map(|p| WireSrc::Node(0, p)).collect();
        let p = TwoPath {
            source: cell.source.clone(),
            target: cell.target.clone(),
            nodes: vec![NodeData { cell, inputs }],
            outputs,
        };
        p.assert_valid();
        p
    }

    pub fn source(&self) -> &OnePath {
        &self.source
    }

    pub fn target(&self) -> &OnePath {
        &self.target
    }

    pub fn nodes(&self) -> &[NodeData] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn outputs(&self) -> &[WireSrc] {
        &self.outputs
    }

    /// The sort carried by a wire.
    pub fn wire_sort(&self, w: WireSrc) -> &Sort {
        match w {
            WireSrc::Input(i) => self.source.get(i).expect("input index in range"),
            WireSrc::Node(n, p) => self.nodes[n].cell.target.get(p).expect("port in range"),
        }
    }

    /// Side-by-side juxtaposition.  Interfaces concatenate.
    pub fn compose0(&self, other: &TwoPath) -> TwoPath {
        let shift_node = self.nodes.len();
        let shift_input = self.source.len();
        let reloc = |w: &WireSrc| match *w {
            WireSrc::Input(i) => WireSrc::Input(i + shift_input),
            WireSrc::Node(n, p) => WireSrc::Node(n + shift_node, p),
        };
        let mut nodes = self.nodes.clone();
        nodes.extend(other.nodes.iter().map(|nd| NodeData {
            cell: nd.cell.clone(),
            inputs: nd.inputs.iter().map(reloc).collect(),
        }));
        let mut outputs = self.outputs.clone();
        outputs.extend(other.outputs.iter().map(reloc));
        let p = TwoPath {
            source: self.source.concat(&other.source),
            target: self.target.concat(&other.target),
            nodes,
            outputs,
        };
        p.assert_valid();
        p
    }

    /// Sequential plugging: the outputs of `self` feed the inputs of `other`.
    pub fn compose1(&self, other: &TwoPath) -> Result<TwoPath, CircuitError> {
        if self.target != other.source {
            return Err(CircuitError::InterfaceMismatch {
                expected: self.target.clone(),
                found: other.source.clone(),
            });
        }
        let shift_node = self.nodes.len();
        let reloc = |w: &WireSrc| match *w {
            WireSrc::Input(i) => self.outputs[i],
            WireSrc::Node(n, p) => WireSrc::Node(n + shift_node, p),
        };
        let mut nodes = self.nodes.clone();
        nodes.extend(other.nodes.iter().map(|nd| NodeData {
            cell: nd.cell.clone(),
            inputs: nd.inputs.iter().map(reloc).collect(),
        }));
        let outputs = other.outputs.iter().map(reloc).collect();
        let p = TwoPath {
            source: self.source.clone(),
            target: other.target.clone(),
            nodes,
            outputs,
        };
        p.assert_valid();
        Ok(p)
    }

    /// Checks linearity, sorting and topological ordering of the network.
    fn assert_valid(&self) {
        let mut consumed_inputs = vec![0usize; self.source.len()];
        let mut consumed_ports: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .map(|nd| vec![0; nd.cell.coarity()])
            .collect();
        let mut consume = |w: &WireSrc, here: usize| match *w {
            WireSrc::Input(i) => {
                assert!(i < consumed_inputs.len(), "input reference out of range");
                consumed_inputs[i] += 1;
            }
            WireSrc::Node(n, p) => {
                assert!(n < here, "node references must point backwards");
                assert!(p < consumed_ports[n].len(), "port reference out of range");
                consumed_ports[n][p] += 1;
            }
        };
        for (idx, nd) in self.nodes.iter().enumerate() {
            assert_eq!(
                nd.inputs.len(),
                nd.cell.arity(),
                "gate {} expects {} inputs",
                nd.cell.name,
                nd.cell.arity()
            );
            for w in &nd.inputs {
                consume(w, idx);
            }
        }
        assert_eq!(self.outputs.len(), self.target.len());
        for w in &self.outputs {
            consume(w, self.nodes.len());
        }
        assert!(
            consumed_inputs.iter().all(|&c| c == 1),
            "every global input must be consumed exactly once"
        );
        assert!(
            consumed_ports.iter().flatten().all(|&c| c == 1),
            "every gate output must be consumed exactly once"
        );
        for (idx, nd) in self.nodes.iter().enumerate() {
            for (q, w) in nd.inputs.iter().enumerate() {
                assert_eq!(
                    self.wire_sort(*w),
                    nd.cell.source.get(q).unwrap(),
                    "sort mismatch at node {idx} port {q}"
                );
            }
        }
        for (j, w) in self.outputs.iter().enumerate() {
            assert_eq!(self.wire_sort(*w), self.target.get(j).unwrap());
        }
    }

    pub(crate) fn consumers(&self) -> Consumers {
        let mut of_input = vec![WireDst::Output(usize::MAX); self.source.len()];
        let mut of_node: Vec<Vec<WireDst>> = self
            .nodes
            .iter()
            .map(|nd| vec![WireDst::Output(usize::MAX); nd.cell.coarity()])
            .collect();
        for (idx, nd) in self.nodes.iter().enumerate() {
            for (q, w) in nd.inputs.iter().enumerate() {
                match *w {
                    WireSrc::Input(i) => of_input[i] = WireDst::Node(idx, q),
                    WireSrc::Node(n, p) => of_node[n][p] = WireDst::Node(idx, q),
                }
            }
        }
        for (j, w) in self.outputs.iter().enumerate() {
            match *w {
                WireSrc::Input(i) => of_input[i] = WireDst::Output(j),
                WireSrc::Node(n, p) => of_node[n][p] = WireDst::Output(j),
            }
        }
        Consumers { of_input, of_node }
    }

    /// Canonical form of the circuit: equal strings exactly characterize
    /// equality modulo deformation.
    pub fn canonical_key(&self) -> String {
        self.canonical().0
    }

    /// A total order on nodes that is stable under renumbering: isomorphic
    /// circuits order corresponding nodes identically.
    pub(crate) fn canonical_order(&self) -> Vec<usize> {
        self.canonical().1
    }

    fn canonical(&self) -> (String, Vec<usize>) {
        let consumers = self.consumers();
        let n = self.nodes.len();
        let mut canon: Vec<Option<usize>> = vec![None; n];
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut queue: VecDeque<usize> = VecDeque::new();
        let discover = |m: usize, canon: &mut Vec<Option<usize>>,
                        order: &mut Vec<usize>,
                        queue: &mut VecDeque<usize>| {
            if canon[m].is_none() {
                canon[m] = Some(order.len());
                order.push(m);
                queue.push_back(m);
            }
        };
        for i in 0..self.source.len() {
            if let WireDst::Node(m, _) = consumers.of_input[i] {
                discover(m, &mut canon, &mut order, &mut queue);
            }
        }
        for w in &self.outputs {
            if let WireSrc::Node(m, _) = w {
                discover(*m, &mut canon, &mut order, &mut queue);
            }
        }
        while let Some(m) = queue.pop_front() {
            for w in &self.nodes[m].inputs {
                if let WireSrc::Node(m2, _) = w {
                    discover(*m2, &mut canon, &mut order, &mut queue);
                }
            }
            for dst in &consumers.of_node[m] {
                if let WireDst::Node(m2, _) = dst {
                    discover(*m2, &mut canon, &mut order, &mut queue);
                }
            }
        }

        let tok = |w: &WireSrc, canon: &Vec<Option<usize>>| match *w {
            WireSrc::Input(i) => format!("g{i}"),
            WireSrc::Node(m, p) => format!("n{}.{p}", canon[m].expect("reachable node")),
        };
        let mut key = String::new();
        key.push_str("S:");
        for s in self.source.iter() {
            key.push_str(s.as_str());
            key.push(',');
        }
        key.push_str(";T:");
        for s in self.target.iter() {
            key.push_str(s.as_str());
            key.push(',');
        }
        key.push_str(";O:");
        for w in &self.outputs {
            key.push_str(&tok(w, &canon));
            key.push(',');
        }
        key.push(';');
        for &m in &order {
            let nd = &self.nodes[m];
            key.push_str(&nd.cell.name);
            key.push('(');
            for w in &nd.inputs {
                key.push_str(&tok(w, &canon));
                key.push(',');
            }
            key.push_str(");");
        }

        // Components not connected to the interface: canonicalize each by
        // minimizing over starting nodes, then sort the encodings.
        let unreached: Vec<usize> = (0..n).filter(|&m| canon[m].is_none()).collect();
        if !unreached.is_empty() {
            let mut comp_of: Vec<Option<usize>> = vec![None; n];
            let mut comps: Vec<Vec<usize>> = Vec::new();
            for &start in &unreached {
                if comp_of[start].is_some() {
                    continue;
                }
                let id = comps.len();
                let mut comp = Vec::new();
                let mut stack = vec![start];
                comp_of[start] = Some(id);
                while let Some(m) = stack.pop() {
                    comp.push(m);
                    for w in &self.nodes[m].inputs {
                        if let WireSrc::Node(m2, _) = w {
                            if comp_of[*m2].is_none() {
                                comp_of[*m2] = Some(id);
                                stack.push(*m2);
                            }
                        }
                    }
                    for dst in &consumers.of_node[m] {
                        if let WireDst::Node(m2, _) = dst {
                            if comp_of[*m2].is_none() {
                                comp_of[*m2] = Some(id);
                                stack.push(*m2);
                            }
                        }
                    }
                }
                comps.push(comp);
            }
            let mut encoded: Vec<(String, Vec<usize>)> = comps
                .iter()
                .map(|comp| self.encode_component(comp, &consumers))
                .collect();
            encoded.sort();
            key.push('#');
            for (enc, members) in encoded {
                key.push_str(&enc);
                key.push('#');
                order.extend(members);
            }
        }
        (key, order)
    }

    /// Minimal encoding of a closed component over all choices of start node.
    fn encode_component(&self, comp: &[usize], consumers: &Consumers) -> (String, Vec<usize>) {
        let mut best: Option<(String, Vec<usize>)> = None;
        for &seed in comp {
            let mut local: std::collections::HashMap<usize, usize> =
                std::collections::HashMap::new();
            let mut order = Vec::new();
            let mut queue = VecDeque::new();
            local.insert(seed, 0);
            order.push(seed);
            queue.push_back(seed);
            while let Some(m) = queue.pop_front() {
                let touch = |m2: usize,
                             local: &mut std::collections::HashMap<usize, usize>,
                             order: &mut Vec<usize>,
                             queue: &mut VecDeque<usize>| {
                    if !local.contains_key(&m2) {
                        local.insert(m2, order.len());
                        order.push(m2);
                        queue.push_back(m2);
                    }
                };
                for w in &self.nodes[m].inputs {
                    if let WireSrc::Node(m2, _) = w {
                        touch(*m2, &mut local, &mut order, &mut queue);
                    }
                }
                for dst in &consumers.of_node[m] {
                    if let WireDst::Node(m2, _) = dst {
                        touch(*m2, &mut local, &mut order, &mut queue);
                    }
                }
            }
            let mut enc = String::new();
            for &m in &order {
                let nd = &self.nodes[m];
                enc.push_str(&nd.cell.name);
                enc.push('(');
                for w in &nd.inputs {
                    match w {
                        WireSrc::Node(m2, p) => {
                            enc.push_str(&format!("n{}.{p}", local[m2]));
                        }
                        WireSrc::Input(_) => unreachable!("closed component has no interface"),
                    }
                }
                enc.push_str(");");
            }
            if best.as_ref().map(|(b, _)| enc < *b).unwrap_or(true) {
                best = Some((enc, order));
            }
        }
        best.expect("component is nonempty")
    }

    /// Equality modulo deformation of the plane drawing.
    pub fn eq_mod_deformation(&self, other: &TwoPath) -> bool {
        if self.source != other.source || self.target != other.target {
            return false;
        }
        if self.nodes.len() != other.nodes.len() {
            return false;
        }
        self.canonical_key() == other.canonical_key()
    }

    /// A sequential decomposition into layers holding one gate each, or
    /// `None` when the network admits no planar layering (which indicates a
    /// violation of the construction invariants).
    pub fn layered(&self) -> Option<Vec<Layer>> {
        let items = layering(self, None)?;
        let mut layers = Vec::with_capacity(items.len());
        for item in items {
            let VNode::Real(node) = item.node else {
                unreachable!("no contraction requested")
            };
            layers.push(Layer {
                left: item.left,
                cell: self.nodes[node].cell.clone(),
                node,
                right: item.right,
            });
        }
        Some(layers)
    }

    /// Human-readable layered rendering, one line per gate.
    pub fn layered_text(&self) -> Vec<String> {
        match self.layered() {
            Some(layers) => layers
                .iter()
                .map(|l| format!("{} {} {}", l.left, l.cell.name, l.right))
                .collect(),
            None => vec!["<unlayerable network>".to_string()],
        }
    }

    /// Structural JSON dump: interfaces, gates with their wire producers,
    /// and the layered rendering.  Stable across runs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "source": self.source.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            "target": self.target.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            "nodes": self.nodes.iter().map(|nd| serde_json::json!({
                "cell": nd.cell.name,
                "inputs": nd.inputs.iter().map(|w| w.token()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "outputs": self.outputs.iter().map(|w| w.token()).collect::<Vec<_>>(),
            "layers": self.layered_text(),
        })
    }
}

/// One layer of a sequential decomposition: a single gate extended by
/// identity wires on both sides.
#[derive(Clone, Debug)]
pub struct Layer {
    pub left: OnePath,
    pub cell: Arc<TwoCellDecl>,
    pub node: usize,
    pub right: OnePath,
}

/// A set of nodes treated as one opaque block during layering, with the
/// block's ordered boundary wires.
#[derive(Clone, Debug)]
pub(crate) struct Contraction {
    pub nodes: BTreeSet<usize>,
    /// Host producers feeding the block, in block input-port order.
    pub inputs: Vec<WireSrc>,
    /// Host gate ports emitted by the block, in block output-port order.
    pub out_ports: Vec<(usize, usize)>,
    /// Sorts emitted by the block, indexing `out_ports`.
    pub iface_out: OnePath,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) enum VNode {
    Real(usize),
    Block,
}

/// A wire of the contracted network.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
enum VWire {
    Input(usize),
    Port(VNode, usize),
}

#[derive(Clone, Debug)]
pub(crate) struct VItem {
    pub left: OnePath,
    pub node: VNode,
    pub right: OnePath,
}

/// Searches for a sequential one-gate-per-layer scheduling of `path`, with
/// the nodes of `contraction` (if given) fused into a single block.  Returns
/// `None` when no scheduling exists, i.e. when the (contracted) network is
/// not expressible by the two composition operations.
pub(crate) fn layering(path: &TwoPath, contraction: Option<&Contraction>) -> Option<Vec<VItem>> {
    let out_port_index = |n: usize, p: usize| -> Option<usize> {
        contraction.and_then(|c| c.out_ports.iter().position(|&(m, q)| (m, q) == (n, p)))
    };
    let vwire = |w: WireSrc| -> VWire {
        match w {
            WireSrc::Input(i) => VWire::Input(i),
            WireSrc::Node(n, p) => {
                if contraction.map(|c| c.nodes.contains(&n)).unwrap_or(false) {
                    VWire::Port(
                        VNode::Block,
                        out_port_index(n, p).expect("block port consumed outside the block"),
                    )
                } else {
                    VWire::Port(VNode::Real(n), p)
                }
            }
        }
    };
    let vsort = |w: &VWire| -> Sort {
        match w {
            VWire::Input(i) => path.source().get(*i).unwrap().clone(),
            VWire::Port(VNode::Real(n), p) => path.nodes()[*n].cell.target.get(*p).unwrap().clone(),
            VWire::Port(VNode::Block, p) => contraction
                .unwrap()
                .iface_out
                .get(*p)
                .expect("block output sort")
                .clone(),
        }
    };

    let mut vnodes: Vec<VNode> = (0..path.node_count())
        .filter(|n| {
            contraction
                .map(|c| !c.nodes.contains(n))
                .unwrap_or(true)
        })
        .map(VNode::Real)
        .collect();
    if contraction.is_some() {
        vnodes.push(VNode::Block);
    }
    let vinputs = |v: VNode| -> Vec<VWire> {
        match v {
            VNode::Real(n) => path.nodes()[n].inputs.iter().map(|w| vwire(*w)).collect(),
            VNode::Block => contraction
                .unwrap()
                .inputs
                .iter()
                .map(|w| vwire(*w))
                .collect(),
        }
    };
    let vcoarity = |v: VNode| -> usize {
        match v {
            VNode::Real(n) => path.nodes()[n].cell.coarity(),
            VNode::Block => contraction.unwrap().out_ports.len(),
        }
    };

    let goal: Vec<VWire> = path.outputs().iter().map(|w| vwire(*w)).collect();
    let start: Vec<VWire> = (0..path.source().len()).map(VWire::Input).collect();

    // Depth-first scheduling with failure memoization.  States are small:
    // the remaining node set plus the current frontier.
    struct Search<'a> {
        vnodes: &'a [VNode],
        vinputs: Vec<Vec<VWire>>,
        vcoarity: Vec<usize>,
        goal: &'a [VWire],
        failed: HashSet<(Vec<bool>, Vec<VWire>)>,
    }
    impl Search<'_> {
        fn run(
            &mut self,
            remaining: &mut Vec<bool>,
            frontier: &mut Vec<VWire>,
            acc: &mut Vec<(usize, usize)>,
        ) -> bool {
            if remaining.iter().all(|r| !r) {
                return frontier.as_slice() == self.goal;
            }
            let state = (remaining.clone(), frontier.clone());
            if self.failed.contains(&state) {
                return false;
            }
            for vi in 0..self.vnodes.len() {
                if !remaining[vi] {
                    continue;
                }
                let ins = self.vinputs[vi].clone();
                let positions: Vec<usize> = if ins.is_empty() {
                    (0..=frontier.len()).collect()
                } else if ins.len() <= frontier.len() {
                    (0..=frontier.len() - ins.len())
                        .filter(|&pos| frontier[pos..pos + ins.len()] == ins[..])
                        .collect()
                } else {
                    Vec::new()
                };
                for pos in positions {
                    let outs: Vec<VWire> = (0..self.vcoarity[vi])
                        .map(|p| VWire::Port(self.vnodes[vi], p))
                        .collect();
                    let removed: Vec<VWire> = frontier
                        .splice(pos..pos + ins.len(), outs)
                        .collect();
                    remaining[vi] = false;
                    acc.push((vi, pos));
                    if self.run(remaining, frontier, acc) {
                        return true;
                    }
                    acc.pop();
                    remaining[vi] = true;
                    let coarity = self.vcoarity[vi];
                    frontier.splice(pos..pos + coarity, removed);
                }
            }
            self.failed.insert(state);
            false
        }
    }

    let mut search = Search {
        vnodes: &vnodes,
        vinputs: vnodes.iter().map(|&v| vinputs(v)).collect(),
        vcoarity: vnodes.iter().map(|&v| vcoarity(v)).collect(),
        goal: &goal,
        failed: HashSet::new(),
    };
    let mut remaining = vec![true; vnodes.len()];
    let mut frontier = start.clone();
    let mut acc: Vec<(usize, usize)> = Vec::new();
    if !search.run(&mut remaining, &mut frontier, &mut acc) {
        return None;
    }

    // Replay the schedule to record the flanking identity interfaces.
    let mut items = Vec::with_capacity(acc.len());
    let mut frontier = start;
    for (vi, pos) in acc {
        let v = vnodes[vi];
        let k = search.vinputs[vi].len();
        let left: OnePath = frontier[..pos].iter().map(&vsort).collect();
        let right: OnePath = frontier[pos + k..].iter().map(&vsort).collect();
        let outs: Vec<VWire> = (0..search.vcoarity[vi])
            .map(|p| VWire::Port(v, p))
            .collect();
        frontier.splice(pos..pos + k, outs);
        items.push(VItem {
            left,
            node: v,
            right,
        });
    }
    Some(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> Sort {
        Sort::new("o")
    }

    fn sig() -> (Arc<TwoCellDecl>, Arc<TwoCellDecl>, Arc<TwoCellDecl>) {
        let zero = TwoCellDecl::algebra("zero", vec![], s());
        let succ = TwoCellDecl::algebra("succ", vec![s()], s());
        let add = TwoCellDecl::algebra("add", vec![s(), s()], s());
        (zero, succ, add)
    }

    #[test]
    fn identity_has_no_nodes() {
        let id = TwoPath::identity(OnePath::from_sorts(vec![s(), s()]));
        assert_eq!(id.node_count(), 0);
        assert_eq!(id.source(), id.target());
    }

    #[test]
    fn compose1_rejects_interface_mismatch() {
        let (_, succ, _) = sig();
        let one = TwoPath::generator(succ);
        let two = TwoPath::identity(OnePath::from_sorts(vec![s(), s()]));
        assert!(one.compose1(&two).is_err());
    }

    #[test]
    fn compose_laws_up_to_deformation() {
        let (zero, succ, add) = sig();
        let f = TwoPath::generator(add.clone());
        // Unit laws.
        let left = TwoPath::identity(f.source().clone()).compose1(&f).unwrap();
        let right = f.compose1(&TwoPath::identity(f.target().clone())).unwrap();
        assert!(left.eq_mod_deformation(&f));
        assert!(right.eq_mod_deformation(&f));
        // Associativity of plugging.
        let g = TwoPath::generator(succ.clone());
        let h = TwoPath::generator(succ.clone());
        let a = f.compose1(&g).unwrap().compose1(&h).unwrap();
        let b = f.compose1(&g.compose1(&h).unwrap()).unwrap();
        assert!(a.eq_mod_deformation(&b));
        // Exchange: (f * id_c) ; (id_b * g) == (id_a * g) ; (f * id_d)
        // for f: a -> b and g: c -> d.  Here f = z has empty source, so the
        // identity factor on the right-hand side's first layer is empty too.
        let z = TwoPath::generator(zero);
        let sc = TwoPath::generator(succ);
        let lhs = z
            .compose0(&TwoPath::identity(OnePath::single(s())))
            .compose1(&TwoPath::identity(OnePath::single(s())).compose0(&sc))
            .unwrap();
        let rhs = TwoPath::identity(OnePath::empty())
            .compose0(&sc)
            .compose1(&z.compose0(&TwoPath::identity(OnePath::single(s()))))
            .unwrap();
        assert!(lhs.eq_mod_deformation(&rhs));
    }

    #[test]
    fn deformation_distinguishes_order_of_distinct_gates() {
        let zero = TwoCellDecl::algebra("zero", vec![], s());
        let one = TwoCellDecl::algebra("one", vec![], s());
        let a = TwoPath::generator(zero.clone()).compose0(&TwoPath::generator(one.clone()));
        let b = TwoPath::generator(one).compose0(&TwoPath::generator(zero));
        assert!(!a.eq_mod_deformation(&b));
    }

    #[test]
    fn closed_scalar_components_commute() {
        let zero = TwoCellDecl::algebra("zero", vec![], s());
        let eat = Arc::new(TwoCellDecl {
            name: "eat".into(),
            source: OnePath::single(s()),
            target: OnePath::empty(),
            kind: CellKind::Algebra,
        });
        let loop1 = TwoPath::generator(zero.clone())
            .compose1(&TwoPath::generator(eat.clone()))
            .unwrap();
        let one = TwoCellDecl::algebra("one", vec![], s());
        let loop2 = TwoPath::generator(one)
            .compose1(&TwoPath::generator(eat))
            .unwrap();
        let a = loop1.compose0(&loop2);
        let b = loop2.compose0(&loop1);
        assert!(a.eq_mod_deformation(&b));
        assert!(!a.eq_mod_deformation(&loop1.compose0(&loop1)));
    }

    #[test]
    fn layered_roundtrip() {
        let (zero, succ, add) = sig();
        let f = TwoPath::generator(zero.clone())
            .compose0(&TwoPath::generator(succ.clone()))
            .compose1(&TwoPath::generator(add.clone()))
            .unwrap();
        let layers = f.layered().expect("layerable");
        assert_eq!(layers.len(), 3);
        let mut rebuilt = TwoPath::identity(f.source().clone());
        for l in &layers {
            let mid = TwoPath::identity(l.left.clone())
                .compose0(&TwoPath::generator(l.cell.clone()))
                .compose0(&TwoPath::identity(l.right.clone()));
            rebuilt = rebuilt.compose1(&mid).unwrap();
        }
        assert!(rebuilt.eq_mod_deformation(&f));
    }

    #[test]
    fn swap_is_not_identity() {
        let sw = TwoPath::generator(TwoCellDecl::swap(s(), s()));
        let id = TwoPath::identity(OnePath::from_sorts(vec![s(), s()]));
        assert!(!sw.eq_mod_deformation(&id));
    }
}
