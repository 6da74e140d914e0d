//! Hierarchical Mealy machines: data model and execution semantics.
//!
//! A [`Hierarchy`] is a tree of [`MealyMachine`]s. A local state of a machine
//! may be *refined* into a child machine; local states without a refinement
//! are the states of the whole system. Applying an input at a state climbs
//! the ancestors until some machine defines a transition for it, takes that
//! transition, then follows start states back down to a leaf.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::cost::Cost;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MachineId(pub u32);

impl MachineId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InputId(pub u32);

impl InputId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A `(machine, local state)` pair. Every node is either a state of the
/// hierarchy (no refinement) or stands for the child machine it refines into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub machine: MachineId,
    pub state: u32,
}

impl NodeId {
    pub fn new(machine: MachineId, state: u32) -> NodeId {
        NodeId { machine, state }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    /// Local index of the target state in the same machine.
    pub target: u32,
    pub cost: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("unknown machine `{0}`")]
    UnknownMachine(String),
    #[error("machine `{machine}` has no state `{state}`")]
    UnknownState { machine: String, state: String },
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("`{0}` does not resolve to a state of the hierarchy")]
    NotAState(String),
    #[error("invalid global state path `{0}`")]
    BadPath(String),
    #[error("hierarchy is invalid:\n{0}")]
    Invalid(ValidationReport),
}

/// One machine of the hierarchy. The transition table is dense and
/// row-major (`state * inputs + input`); `None` means the machine stops on
/// that input and control passes to the parent.
///
/// State names and transition tables are reference counted so that
/// generators can share one table across thousands of identical machines.
#[derive(Clone, Debug, PartialEq)]
pub struct MealyMachine {
    id: String,
    states: Arc<[String]>,
    start: u32,
    inputs: u32,
    transitions: Arc<[Option<Transition>]>,
}

impl MealyMachine {
    pub fn new(
        id: impl Into<String>,
        states: Vec<String>,
        start: u32,
        inputs: usize,
        transitions: Vec<Option<Transition>>,
    ) -> MealyMachine {
        MealyMachine::from_shared(id, states.into(), start, inputs, transitions.into())
    }

    pub fn from_shared(
        id: impl Into<String>,
        states: Arc<[String]>,
        start: u32,
        inputs: usize,
        transitions: Arc<[Option<Transition>]>,
    ) -> MealyMachine {
        MealyMachine { id: id.into(), states, start, inputs: inputs as u32, transitions }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn shared_states(&self) -> &Arc<[String]> {
        &self.states
    }

    pub fn shared_transitions(&self) -> &Arc<[Option<Transition>]> {
        &self.transitions
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn input_count(&self) -> usize {
        self.inputs as usize
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn state_name(&self, state: u32) -> &str {
        &self.states[state as usize]
    }

    pub fn state_index(&self, name: &str) -> Option<u32> {
        self.states.iter().position(|s| s == name).map(|i| i as u32)
    }

    #[inline]
    pub fn transition(&self, state: u32, input: InputId) -> Option<Transition> {
        self.transitions.get(state as usize * self.inputs as usize + input.index()).copied().flatten()
    }

    pub fn transition_table(&self) -> &[Option<Transition>] {
        &self.transitions
    }

    /// Same machine with every cost passed through `f`.
    pub fn map_costs(&self, f: impl Fn(f64) -> f64) -> MealyMachine {
        let transitions: Vec<_> =
            self.transitions.iter().map(|t| t.map(|t| Transition { target: t.target, cost: f(t.cost) })).collect();
        MealyMachine { transitions: transitions.into(), ..self.clone() }
    }
}

/// Root-to-leaf path of local state names, written `a/b/c` externally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalState(pub Vec<String>);

impl fmt::Display for GlobalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("/"))
    }
}

impl FromStr for GlobalState {
    type Err = HierarchyError;

    fn from_str(s: &str) -> Result<GlobalState, HierarchyError> {
        let parts: Vec<String> = s.split('/').map(str::to_owned).collect();
        if parts.iter().any(String::is_empty) {
            return Err(HierarchyError::BadPath(s.to_owned()));
        }
        Ok(GlobalState(parts))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExecutedStep {
    pub state: NodeId,
    pub input: InputId,
    pub cost: Cost,
}

/// Result of feeding a plan to the hierarchy. When a step stops the
/// machine, that step is recorded with infinite cost and `end` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub steps: Vec<ExecutedStep>,
    pub cost: Cost,
    pub end: Option<NodeId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HierarchyStats {
    /// Number of machines.
    pub machines: usize,
    /// Largest state count of any machine.
    pub max_states: usize,
    /// Number of machine levels on the longest root-to-leaf path.
    pub depth: usize,
    /// Number of leaf states, i.e. the size of the equivalent flat machine.
    pub states: usize,
    pub nodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    EmptyMachine,
    DuplicateInput,
    DuplicateMachineId,
    DuplicateStateName,
    InvalidStateName,
    StartNotAState,
    TableShape,
    TargetNotAState,
    NegativeCost,
    NonFiniteCost,
    UnknownMachine,
    NotATree,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::EmptyMachine => "machine has no states",
            Rule::DuplicateInput => "duplicate input",
            Rule::DuplicateMachineId => "duplicate machine id",
            Rule::DuplicateStateName => "duplicate state name",
            Rule::InvalidStateName => "invalid state name",
            Rule::StartNotAState => "start is not a state",
            Rule::TableShape => "transition table has wrong shape",
            Rule::TargetNotAState => "transition target is not a state",
            Rule::NegativeCost => "negative cost",
            Rule::NonFiniteCost => "non-finite cost",
            Rule::UnknownMachine => "unknown machine",
            Rule::NotATree => "refinement not a tree",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    /// Offending machine id, when the rule is about a single machine.
    pub machine: Option<String>,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.machine {
            Some(m) => write!(f, "machine `{m}`: {} ({})", self.rule, self.detail),
            None => write!(f, "{} ({})", self.rule, self.detail),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

const NO_MACHINE: u32 = u32::MAX;

/// `(machine, local state, child machine)`.
type Refinement = (MachineId, u32, MachineId);

/// A tree of Mealy machines sharing one input alphabet.
///
/// Immutable once built; all queries take `&self`.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    inputs: Vec<String>,
    machines: Vec<MealyMachine>,
    root: MachineId,
    /// Prefix sums of state counts; global node index = offset + local.
    node_offset: Vec<u32>,
    /// Child machine per global node, `NO_MACHINE` for leaves.
    refinement: Vec<u32>,
    parent: Vec<Option<NodeId>>,
    /// 1 for the root, 0 for machines unreachable from it.
    level: Vec<u32>,
    start_leaf: Vec<NodeId>,
    depth: u32,
    validated: bool,
}

impl PartialEq for Hierarchy {
    fn eq(&self, other: &Self) -> bool {
        self.inputs == other.inputs
            && self.root == other.root
            && self.machines == other.machines
            && self.refinement == other.refinement
    }
}

impl Hierarchy {
    /// Builds and validates a hierarchy. `refinements` lists
    /// `(machine, local state, child machine)` triples.
    pub fn new(
        inputs: Vec<String>,
        machines: Vec<MealyMachine>,
        root: MachineId,
        refinements: &[(MachineId, u32, MachineId)],
    ) -> Result<Hierarchy, HierarchyError> {
        let mut h = Hierarchy::new_unchecked(inputs, machines, root, refinements)?;
        let report = validate(&h);
        if report.is_valid() {
            h.validated = true;
            Ok(h)
        } else {
            Err(HierarchyError::Invalid(report))
        }
    }

    /// Builds without validating. Only refinement entries whose source
    /// `(machine, state)` does not exist are rejected, since they cannot be
    /// stored; everything else is left for [`validate`] to report.
    pub fn new_unchecked(
        inputs: Vec<String>,
        machines: Vec<MealyMachine>,
        root: MachineId,
        refinements: &[(MachineId, u32, MachineId)],
    ) -> Result<Hierarchy, HierarchyError> {
        let mut node_offset = Vec::with_capacity(machines.len() + 1);
        let mut total = 0u32;
        node_offset.push(0);
        for m in &machines {
            total += m.state_count() as u32;
            node_offset.push(total);
        }
        let mut refinement = vec![NO_MACHINE; total as usize];
        for &(m, s, child) in refinements {
            let machine = machines.get(m.index()).ok_or_else(|| HierarchyError::UnknownMachine(format!("#{}", m.0)))?;
            if s as usize >= machine.state_count() {
                return Err(HierarchyError::UnknownState { machine: machine.id().to_owned(), state: format!("#{s}") });
            }
            refinement[(node_offset[m.index()] + s) as usize] = child.0;
        }
        let mut h = Hierarchy {
            inputs,
            machines,
            root,
            node_offset,
            refinement,
            parent: Vec::new(),
            level: Vec::new(),
            start_leaf: Vec::new(),
            depth: 0,
            validated: false,
        };
        h.derive();
        Ok(h)
    }

    /// Parent pointers, levels and start leaves. Guarded so that it
    /// terminates on malformed (cyclic, dangling) refinements.
    fn derive(&mut self) {
        let n = self.machines.len();
        let mut parent = vec![None; n];
        for (m, machine) in self.machines.iter().enumerate() {
            for s in 0..machine.state_count() as u32 {
                let child = self.refinement[(self.node_offset[m] + s) as usize];
                if (child as usize) < n && parent[child as usize].is_none() {
                    parent[child as usize] = Some(NodeId::new(MachineId(m as u32), s));
                }
            }
        }

        let mut level = vec![0u32; n];
        let mut order = Vec::with_capacity(n);
        if self.root.index() < n {
            level[self.root.index()] = 1;
            let mut queue = VecDeque::from([self.root]);
            while let Some(m) = queue.pop_front() {
                order.push(m);
                for s in 0..self.machines[m.index()].state_count() as u32 {
                    let child = self.refinement[(self.node_offset[m.index()] + s) as usize];
                    if (child as usize) < n && level[child as usize] == 0 {
                        level[child as usize] = level[m.index()] + 1;
                        queue.push_back(MachineId(child));
                    }
                }
            }
        }

        // Reverse BFS order visits children before parents.
        let mut start_leaf: Vec<NodeId> =
            (0..n).map(|m| NodeId::new(MachineId(m as u32), self.machines[m].start)).collect();
        for &m in order.iter().rev() {
            let machine = &self.machines[m.index()];
            let s = machine.start;
            if (s as usize) < machine.state_count() {
                let child = self.refinement[(self.node_offset[m.index()] + s) as usize];
                if (child as usize) < n && level[child as usize] > level[m.index()] {
                    start_leaf[m.index()] = start_leaf[child as usize];
                }
            }
        }

        self.depth = level.iter().copied().max().unwrap_or(0);
        self.parent = parent;
        self.level = level;
        self.start_leaf = start_leaf;
    }

    /// Whether this hierarchy passed [`validate`] on construction.
    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Machines grouped by level, root level first.
    pub fn machines_by_level(&self) -> Vec<Vec<MachineId>> {
        let mut levels = vec![Vec::new(); self.depth()];
        for m in self.machine_ids() {
            let l = self.level(m);
            if l > 0 {
                levels[l - 1].push(m);
            }
        }
        levels
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn input_ids(&self) -> impl Iterator<Item = InputId> {
        (0..self.inputs.len() as u32).map(InputId)
    }

    pub fn input_id(&self, name: &str) -> Option<InputId> {
        self.inputs.iter().position(|i| i == name).map(|i| InputId(i as u32))
    }

    pub fn input_name(&self, input: InputId) -> &str {
        &self.inputs[input.index()]
    }

    pub fn machines(&self) -> &[MealyMachine] {
        &self.machines
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    pub fn machine_ids(&self) -> impl Iterator<Item = MachineId> {
        (0..self.machines.len() as u32).map(MachineId)
    }

    pub fn machine(&self, m: MachineId) -> &MealyMachine {
        &self.machines[m.index()]
    }

    /// Linear scan; callers resolving many ids should build their own index.
    pub fn machine_by_id(&self, id: &str) -> Option<MachineId> {
        self.machines.iter().position(|m| m.id() == id).map(|i| MachineId(i as u32))
    }

    pub fn root(&self) -> MachineId {
        self.root
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn level(&self, m: MachineId) -> usize {
        self.level[m.index()] as usize
    }

    pub fn node_count(&self) -> usize {
        self.refinement.len()
    }

    #[inline]
    pub fn node_index(&self, node: NodeId) -> usize {
        (self.node_offset[node.machine.index()] + node.state) as usize
    }

    /// The machine a node refines into, if any.
    #[inline]
    pub fn child(&self, node: NodeId) -> Option<MachineId> {
        let c = self.refinement[self.node_index(node)];
        (c != NO_MACHINE).then_some(MachineId(c))
    }

    /// Whether `node` is a state of the hierarchy (a leaf).
    #[inline]
    pub fn is_state(&self, node: NodeId) -> bool {
        self.refinement[self.node_index(node)] == NO_MACHINE
    }

    /// The node in the parent machine that `m` refines; `None` for the root.
    #[inline]
    pub fn parent(&self, m: MachineId) -> Option<NodeId> {
        self.parent[m.index()]
    }

    pub fn refinements(&self) -> Vec<(MachineId, u32, MachineId)> {
        let mut out = Vec::new();
        for m in self.machine_ids() {
            for s in 0..self.machine(m).state_count() as u32 {
                if let Some(c) = self.child(NodeId::new(m, s)) {
                    out.push((m, s, c));
                }
            }
        }
        out
    }

    /// Leaf reached by following start states down from `m`.
    #[inline]
    pub fn start_leaf(&self, m: MachineId) -> NodeId {
        self.start_leaf[m.index()]
    }

    pub fn start_state(&self, m: MachineId) -> Result<NodeId, HierarchyError> {
        if m.index() >= self.machines.len() {
            return Err(HierarchyError::UnknownMachine(format!("#{}", m.0)));
        }
        Ok(self.start_leaf(m))
    }

    /// Leaf reached when control enters `node`: the node itself for a
    /// state, else the start leaf of its child machine.
    #[inline]
    pub fn enter(&self, node: NodeId) -> NodeId {
        match self.child(node) {
            Some(c) => self.start_leaf(c),
            None => node,
        }
    }

    #[inline]
    pub fn transition(&self, node: NodeId, input: InputId) -> Option<Transition> {
        self.machines[node.machine.index()].transition(node.state, input)
    }

    /// Hierarchical transition and output: climb until some ancestor defines
    /// `input`, take it, descend along start states. `None` when no
    /// ancestor defines the input (the hierarchy stops).
    #[inline]
    pub fn step(&self, node: NodeId, input: InputId) -> Option<(NodeId, Cost)> {
        let mut current = node;
        loop {
            if let Some(t) = self.transition(current, input) {
                let target = NodeId::new(current.machine, t.target);
                return Some((self.enter(target), Cost::from_valid(t.cost)));
            }
            current = self.parent(current.machine)?;
        }
    }

    /// Checked variant of [`Hierarchy::step`].
    pub fn hierarchical_step(&self, node: NodeId, input: InputId) -> Result<Option<(NodeId, Cost)>, HierarchyError> {
        self.check_node(node)?;
        if input.index() >= self.inputs.len() {
            return Err(HierarchyError::UnknownInput(format!("#{}", input.0)));
        }
        Ok(self.step(node, input))
    }

    fn check_node(&self, node: NodeId) -> Result<(), HierarchyError> {
        let machine = self
            .machines
            .get(node.machine.index())
            .ok_or_else(|| HierarchyError::UnknownMachine(format!("#{}", node.machine.0)))?;
        if node.state as usize >= machine.state_count() {
            return Err(HierarchyError::UnknownState {
                machine: machine.id().to_owned(),
                state: format!("#{}", node.state),
            });
        }
        Ok(())
    }

    /// Executes `plan` from `start`; the cumulative cost is infinite as
    /// soon as a step stops the hierarchy.
    pub fn run_plan(&self, start: NodeId, plan: &[InputId]) -> Execution {
        let mut steps = Vec::with_capacity(plan.len());
        let mut cost = Cost::ZERO;
        let mut current = start;
        for &input in plan {
            match self.step(current, input) {
                Some((next, c)) => {
                    steps.push(ExecutedStep { state: current, input, cost: c });
                    cost = cost + c;
                    current = next;
                }
                None => {
                    steps.push(ExecutedStep { state: current, input, cost: Cost::INFINITY });
                    return Execution { steps, cost: Cost::INFINITY, end: None };
                }
            }
        }
        Execution { steps, cost, end: Some(current) }
    }

    /// Whether `node` lies in the subtree rooted at machine `m`.
    pub fn contains(&self, m: MachineId, node: NodeId) -> bool {
        let mut current = node.machine;
        loop {
            if current == m {
                return true;
            }
            match self.parent(current) {
                Some(p) => current = p.machine,
                None => return false,
            }
        }
    }

    /// All states (leaves) in machine order.
    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.machine_ids().flat_map(move |m| {
            (0..self.machine(m).state_count() as u32).map(move |s| NodeId::new(m, s)).filter(move |&n| self.is_state(n))
        })
    }

    pub fn stats(&self) -> HierarchyStats {
        let states = self.refinement.iter().filter(|&&c| c == NO_MACHINE).count();
        HierarchyStats {
            machines: self.machines.len(),
            max_states: self.machines.iter().map(MealyMachine::state_count).max().unwrap_or(0),
            depth: self.depth(),
            states,
            nodes: self.refinement.len(),
        }
    }

    /// Root-to-node chain of nodes, root side first.
    pub fn ancestry(&self, node: NodeId) -> Vec<NodeId> {
        let mut chain = vec![node];
        let mut m = node.machine;
        while let Some(p) = self.parent(m) {
            chain.push(p);
            m = p.machine;
        }
        chain.reverse();
        chain
    }

    pub fn global_state(&self, node: NodeId) -> GlobalState {
        GlobalState(
            self.ancestry(node).into_iter().map(|n| self.machine(n.machine).state_name(n.state).to_owned()).collect(),
        )
    }

    /// Resolves a root-to-leaf path; the last element must be a state.
    pub fn resolve(&self, path: &GlobalState) -> Result<NodeId, HierarchyError> {
        let mut machine = self.root;
        let mut node = None;
        for (i, name) in path.0.iter().enumerate() {
            if i > 0 {
                machine = match node.and_then(|n| self.child(n)) {
                    Some(c) => c,
                    None => return Err(HierarchyError::NotAState(path.to_string())),
                };
            }
            let m = self.machine(machine);
            let s = m
                .state_index(name)
                .ok_or_else(|| HierarchyError::UnknownState { machine: m.id().to_owned(), state: name.clone() })?;
            node = Some(NodeId::new(machine, s));
        }
        match node {
            Some(n) if self.is_state(n) => Ok(n),
            _ => Err(HierarchyError::NotAState(path.to_string())),
        }
    }

    /// Copy of the hierarchy with every transition cost passed through `f`.
    /// Panics if `f` produces a negative or non-finite cost.
    pub fn map_costs(&self, f: impl Fn(f64) -> f64) -> Hierarchy {
        let f = |c: f64| {
            let out = f(c);
            assert!(out.is_finite() && out >= 0.0, "mapped cost {out} is not a valid cost");
            out
        };
        Hierarchy { machines: self.machines.iter().map(|m| m.map_costs(f)).collect(), ..self.clone() }
    }
}

/// Checks every structural rule and reports all violations found.
pub fn validate(h: &Hierarchy) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |machine: Option<&str>, rule: Rule, detail: String| {
        violations.push(Violation { machine: machine.map(str::to_owned), rule, detail });
    };

    let mut seen_inputs = std::collections::HashSet::new();
    for input in &h.inputs {
        if !seen_inputs.insert(input.as_str()) {
            push(None, Rule::DuplicateInput, format!("input `{input}`"));
        }
    }

    let n = h.machines.len();
    let mut seen_ids = std::collections::HashSet::new();
    for m in &h.machines {
        let id = m.id();
        if !seen_ids.insert(id) {
            push(Some(id), Rule::DuplicateMachineId, format!("`{id}` appears twice"));
        }
        if m.state_count() == 0 {
            push(Some(id), Rule::EmptyMachine, "no states".into());
            continue;
        }
        let mut names = std::collections::HashSet::new();
        for s in m.states() {
            if s.is_empty() || s.contains('/') {
                push(Some(id), Rule::InvalidStateName, format!("`{s}`"));
            }
            if !names.insert(s.as_str()) {
                push(Some(id), Rule::DuplicateStateName, format!("`{s}`"));
            }
        }
        if m.start() as usize >= m.state_count() {
            push(Some(id), Rule::StartNotAState, format!("start index {}", m.start()));
        }
        if m.input_count() != h.inputs.len() || m.transition_table().len() != m.state_count() * h.inputs.len() {
            push(
                Some(id),
                Rule::TableShape,
                format!(
                    "{} entries for {} states x {} inputs",
                    m.transition_table().len(),
                    m.state_count(),
                    h.inputs.len()
                ),
            );
            continue;
        }
        for (i, t) in m.transition_table().iter().enumerate() {
            let Some(t) = t else { continue };
            let (s, x) = (i / h.inputs.len(), i % h.inputs.len());
            let at = format!("from `{}` on `{}`", m.states()[s], h.inputs[x]);
            if t.target as usize >= m.state_count() {
                push(Some(id), Rule::TargetNotAState, format!("{at}: target #{}", t.target));
            }
            if t.cost.is_nan() || t.cost.is_infinite() {
                push(Some(id), Rule::NonFiniteCost, format!("{at}: {}", t.cost));
            } else if t.cost < 0.0 {
                push(Some(id), Rule::NegativeCost, format!("{at}: {}", t.cost));
            }
        }
    }

    if h.root.index() >= n {
        push(None, Rule::UnknownMachine, format!("root #{}", h.root.0));
        return ValidationReport { violations };
    }

    let mut parents = vec![0usize; n];
    for (mi, m) in h.machines.iter().enumerate() {
        for s in 0..m.state_count() as u32 {
            let c = h.refinement[(h.node_offset[mi] + s) as usize];
            if c == NO_MACHINE {
                continue;
            }
            if c as usize >= n {
                push(
                    Some(m.id()),
                    Rule::UnknownMachine,
                    format!("state `{}` refines into #{c}", m.states()[s as usize]),
                );
            } else {
                parents[c as usize] += 1;
            }
        }
    }
    for (mi, m) in h.machines.iter().enumerate() {
        let expected = usize::from(mi != h.root.index());
        if parents[mi] != expected {
            push(Some(m.id()), Rule::NotATree, format!("{} parent edges, expected {expected}", parents[mi]));
        } else if h.level[mi] == 0 {
            push(Some(m.id()), Rule::NotATree, "not reachable from the root (cycle)".into());
        }
    }
    ValidationReport { violations }
}

/// Name-based construction helper for hand-written hierarchies.
#[derive(Debug, Default)]
pub struct HierarchyBuilder {
    inputs: Vec<String>,
    machines: Vec<MealyMachine>,
    tables: Vec<Vec<Option<Transition>>>,
    refinements: Vec<(MachineId, u32, MachineId)>,
}

impl HierarchyBuilder {
    pub fn new<S: AsRef<str>>(inputs: &[S]) -> HierarchyBuilder {
        HierarchyBuilder { inputs: inputs.iter().map(|s| s.as_ref().to_owned()).collect(), ..Default::default() }
    }

    pub fn machine<S: AsRef<str>>(&mut self, id: &str, states: &[S], start: &str) -> Result<MachineId, HierarchyError> {
        let states: Vec<String> = states.iter().map(|s| s.as_ref().to_owned()).collect();
        let start_idx = states
            .iter()
            .position(|s| s == start)
            .ok_or_else(|| HierarchyError::UnknownState { machine: id.to_owned(), state: start.to_owned() })?;
        let table = vec![None; states.len() * self.inputs.len()];
        self.machines.push(MealyMachine::new(id, states, start_idx as u32, self.inputs.len(), Vec::new()));
        self.tables.push(table);
        Ok(MachineId(self.machines.len() as u32 - 1))
    }

    pub fn state_count(&self, m: MachineId) -> usize {
        self.machines[m.index()].state_count()
    }

    fn state(&self, m: MachineId, name: &str) -> Result<u32, HierarchyError> {
        let machine = &self.machines[m.index()];
        machine
            .state_index(name)
            .ok_or_else(|| HierarchyError::UnknownState { machine: machine.id().to_owned(), state: name.to_owned() })
    }

    pub fn transition(
        &mut self,
        m: MachineId,
        from: &str,
        input: &str,
        to: &str,
        cost: f64,
    ) -> Result<&mut Self, HierarchyError> {
        let s = self.state(m, from)?;
        let t = self.state(m, to)?;
        let x = self
            .inputs
            .iter()
            .position(|i| i == input)
            .ok_or_else(|| HierarchyError::UnknownInput(input.to_owned()))?;
        let width = self.inputs.len();
        self.tables[m.index()][s as usize * width + x] = Some(Transition { target: t, cost });
        Ok(self)
    }

    pub fn refine(&mut self, m: MachineId, state: &str, child: MachineId) -> Result<&mut Self, HierarchyError> {
        let s = self.state(m, state)?;
        self.refinements.push((m, s, child));
        Ok(self)
    }

    fn finish(self) -> (Vec<String>, Vec<MealyMachine>, Vec<Refinement>) {
        let width = self.inputs.len();
        let machines = self
            .machines
            .into_iter()
            .zip(self.tables)
            .map(|(m, t)| MealyMachine::new(m.id, m.states.to_vec(), m.start, width, t))
            .collect();
        (self.inputs, machines, self.refinements)
    }

    pub fn build(self, root: MachineId) -> Result<Hierarchy, HierarchyError> {
        let (inputs, machines, refinements) = self.finish();
        Hierarchy::new(inputs, machines, root, &refinements)
    }

    pub fn build_unchecked(self, root: MachineId) -> Result<Hierarchy, HierarchyError> {
        let (inputs, machines, refinements) = self.finish();
        Hierarchy::new_unchecked(inputs, machines, root, &refinements)
    }
}
