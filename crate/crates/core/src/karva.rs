//! Karva-encoded genomes: symbols, genes, multigenic chromosomes, and their
//! decoding into expression trees.
//!
//! A gene is a fixed-length linear string split into a head (functions or
//! terminals) and a tail (terminals only). The string is read level by level
//! (breadth first): the first symbol is the root and every function takes the
//! next two unconsumed symbols as its children. Whatever is left after the
//! tree closes is the non-coding region. Because the tail is sized with
//! [`tail_length`], a valid gene always closes its tree before the string ends.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Arity of every function in the set `{+, -, *, /}`.
pub const MAX_ARITY: usize = 2;

/// Number of random numerical constants carried by each gene (`c0..c9`).
pub const CONSTANT_POOL_SIZE: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KarvaError {
    #[error("{name} must be at least 1")]
    ZeroArgument { name: &'static str },
    #[error("invalid gene: {0}")]
    InvalidGene(#[from] GeneDefect),
    #[error("chromosome has no genes")]
    EmptyChromosome,
    #[error("gene {index} has shape {head}+{tail}, expected {expected_head}+{expected_tail}")]
    ShapeMismatch {
        index: usize,
        head: usize,
        tail: usize,
        expected_head: usize,
        expected_tail: usize,
    },
    #[error("tree needs a function at position {position}, beyond head length {head_len}")]
    HeadTooShort { position: usize, head_len: usize },
    #[error("tree has {nodes} nodes but the gene holds only {capacity} symbols")]
    TreeTooLarge { nodes: usize, capacity: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Why a gene fails structural validation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneDefect {
    #[error("head is empty")]
    EmptyHead,
    #[error("tail length {tail} does not match head length {head} (expected {expected})")]
    TailLength {
        head: usize,
        tail: usize,
        expected: usize,
    },
    #[error("function symbol at tail[{position}]")]
    FunctionInTail { position: usize },
    #[error("constant c{index} at position {position} is outside the pool of {pool}")]
    ConstantIndex {
        position: usize,
        index: usize,
        pool: usize,
    },
}

/// Tail length that guarantees a complete tree for any head content:
/// `head * (max_arity - 1) + 1`.
pub fn tail_length(head_len: usize, max_arity: usize) -> Result<usize, KarvaError> {
    if head_len == 0 {
        return Err(KarvaError::ZeroArgument { name: "head_length" });
    }
    if max_arity == 0 {
        return Err(KarvaError::ZeroArgument { name: "max_arity" });
    }
    Ok(head_len * (max_arity - 1) + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Function {
    Add,
    Sub,
    Mul,
    Div,
}

impl Function {
    pub const ALL: [Function; 4] = [Function::Add, Function::Sub, Function::Mul, Function::Div];

    #[inline]
    pub fn apply(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Function::Add => lhs + rhs,
            Function::Sub => lhs - rhs,
            Function::Mul => lhs * rhs,
            Function::Div => lhs / rhs,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Function::Add => "+",
            Function::Sub => "-",
            Function::Mul => "*",
            Function::Div => "/",
        }
    }
}

/// One position of a K-expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Func(Function),
    /// Model input `d{i}`.
    Input(u8),
    /// Reference into the gene's constant pool, `c{i}`.
    Const(u8),
}

impl Symbol {
    pub fn is_terminal(self) -> bool {
        !matches!(self, Symbol::Func(_))
    }

    pub fn arity(self) -> usize {
        match self {
            Symbol::Func(_) => MAX_ARITY,
            _ => 0,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Func(func) => f.write_str(func.token()),
            Symbol::Input(i) => write!(f, "d{i}"),
            Symbol::Const(i) => write!(f, "c{i}"),
        }
    }
}

impl FromStr for Symbol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" => return Ok(Symbol::Func(Function::Add)),
            "-" => return Ok(Symbol::Func(Function::Sub)),
            "*" => return Ok(Symbol::Func(Function::Mul)),
            "/" => return Ok(Symbol::Func(Function::Div)),
            _ => {}
        }
        let index = |rest: &str| rest.parse::<u8>().map_err(|_| format!("unknown symbol `{s}`"));
        if let Some(rest) = s.strip_prefix('d') {
            Ok(Symbol::Input(index(rest)?))
        } else if let Some(rest) = s.strip_prefix('c') {
            Ok(Symbol::Const(index(rest)?))
        } else {
            Err(format!("unknown symbol `{s}`"))
        }
    }
}

/// Decoded sub-expression tree of one gene.
#[derive(Clone, Debug, PartialEq)]
pub enum ExpressionTree {
    Input(usize),
    Const(usize),
    Apply(Function, Box<ExpressionTree>, Box<ExpressionTree>),
}

impl ExpressionTree {
    pub fn apply(func: Function, lhs: ExpressionTree, rhs: ExpressionTree) -> Self {
        ExpressionTree::Apply(func, Box::new(lhs), Box::new(rhs))
    }

    pub fn node_count(&self) -> usize {
        match self {
            ExpressionTree::Apply(_, l, r) => 1 + l.node_count() + r.node_count(),
            _ => 1,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ExpressionTree::Apply(_, l, r) => 1 + l.depth().max(r.depth()),
            _ => 1,
        }
    }

    /// Evaluates with plain IEEE arithmetic. `None` means some intermediate
    /// value was not finite (division by zero, overflow, NaN).
    ///
    /// Panics if the tree references an input beyond `inputs.len()`.
    pub fn evaluate(&self, inputs: &[f64], constants: &[f64]) -> Option<f64> {
        let value = match self {
            ExpressionTree::Input(i) => inputs[*i],
            ExpressionTree::Const(i) => constants[*i],
            ExpressionTree::Apply(func, l, r) => {
                func.apply(l.evaluate(inputs, constants)?, r.evaluate(inputs, constants)?)
            }
        };
        value.is_finite().then_some(value)
    }

    /// Breadth-first symbol listing of the tree, i.e. its coding K-expression.
    pub fn to_kexpr(&self) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut queue = std::collections::VecDeque::from([self]);
        while let Some(node) = queue.pop_front() {
            match node {
                ExpressionTree::Input(i) => out.push(Symbol::Input(*i as u8)),
                ExpressionTree::Const(i) => out.push(Symbol::Const(*i as u8)),
                ExpressionTree::Apply(func, l, r) => {
                    out.push(Symbol::Func(*func));
                    queue.push_back(l);
                    queue.push_back(r);
                }
            }
        }
        out
    }

    fn max_input(&self) -> Option<usize> {
        match self {
            ExpressionTree::Input(i) => Some(*i),
            ExpressionTree::Const(_) => None,
            ExpressionTree::Apply(_, l, r) => l.max_input().max(r.max_input()),
        }
    }
}

impl fmt::Display for ExpressionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpressionTree::Input(i) => write!(f, "d{i}"),
            ExpressionTree::Const(i) => write!(f, "c{i}"),
            ExpressionTree::Apply(func, l, r) => write!(f, "({l} {} {r})", func.token()),
        }
    }
}

/// A single gene: head, tail, and its own pool of numerical constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Gene {
    pub head: Vec<Symbol>,
    pub tail: Vec<Symbol>,
    pub constants: Vec<f64>,
}

impl Gene {
    /// Builds a gene and rejects it unless it passes [`Gene::validate`].
    pub fn new(head: Vec<Symbol>, tail: Vec<Symbol>, constants: Vec<f64>) -> Result<Self, KarvaError> {
        let gene = Gene { head, tail, constants };
        gene.validate()?;
        Ok(gene)
    }

    /// Encodes `tree` as a gene with the given head length. Unused head and
    /// tail positions are filled with `filler`, which must be a terminal.
    pub fn encode(
        tree: &ExpressionTree,
        head_len: usize,
        constants: Vec<f64>,
        filler: Symbol,
    ) -> Result<Self, KarvaError> {
        assert!(filler.is_terminal(), "filler must be a terminal");
        let tail_len = tail_length(head_len, MAX_ARITY)?;
        let coding = tree.to_kexpr();
        if coding.len() > head_len + tail_len {
            return Err(KarvaError::TreeTooLarge {
                nodes: coding.len(),
                capacity: head_len + tail_len,
            });
        }
        if let Some(position) = coding
            .iter()
            .enumerate()
            .position(|(i, s)| i >= head_len && !s.is_terminal())
        {
            return Err(KarvaError::HeadTooShort { position, head_len });
        }
        let mut symbols = coding;
        symbols.resize(head_len + tail_len, filler);
        let tail = symbols.split_off(head_len);
        Gene::new(symbols, tail, constants)
    }

    pub fn len(&self) -> usize {
        self.head.len() + self.tail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn symbol(&self, position: usize) -> Symbol {
        if position < self.head.len() {
            self.head[position]
        } else {
            self.tail[position - self.head.len()]
        }
    }

    pub fn symbol_mut(&mut self, position: usize) -> &mut Symbol {
        let h = self.head.len();
        if position < h {
            &mut self.head[position]
        } else {
            &mut self.tail[position - h]
        }
    }

    /// Checks the tail-size rule, tail terminality, and constant references,
    /// reporting the first defect found.
    pub fn validate(&self) -> Result<(), GeneDefect> {
        if self.head.is_empty() {
            return Err(GeneDefect::EmptyHead);
        }
        let expected = self.head.len() * (MAX_ARITY - 1) + 1;
        if self.tail.len() != expected {
            return Err(GeneDefect::TailLength {
                head: self.head.len(),
                tail: self.tail.len(),
                expected,
            });
        }
        if let Some(position) = self.tail.iter().position(|s| !s.is_terminal()) {
            return Err(GeneDefect::FunctionInTail { position });
        }
        let pool = self.constants.len();
        for position in 0..self.len() {
            if let Symbol::Const(i) = self.symbol(position) {
                if usize::from(i) >= pool {
                    return Err(GeneDefect::ConstantIndex {
                        position,
                        index: i.into(),
                        pool,
                    });
                }
            }
        }
        Ok(())
    }

    /// Number of leading symbols that make up the expression tree.
    pub fn coding_length(&self) -> usize {
        let mut frontier = 1;
        let mut i = 0;
        while i < frontier && i < self.len() {
            frontier += self.symbol(i).arity();
            i += 1;
        }
        frontier
    }

    /// Breadth-first Karva decoding.
    pub fn decode(&self) -> Result<ExpressionTree, KarvaError> {
        self.validate()?;
        let n = self.coding_length();
        debug_assert!(n <= self.len());
        // children of position i start at first_child[i]
        let mut first_child = vec![0usize; n];
        let mut next = 1;
        for (i, slot) in first_child.iter_mut().enumerate() {
            if !self.symbol(i).is_terminal() {
                *slot = next;
                next += MAX_ARITY;
            }
        }
        Ok(self.build(0, &first_child))
    }

    fn build(&self, position: usize, first_child: &[usize]) -> ExpressionTree {
        match self.symbol(position) {
            Symbol::Input(i) => ExpressionTree::Input(i.into()),
            Symbol::Const(i) => ExpressionTree::Const(i.into()),
            Symbol::Func(func) => {
                let c = first_child[position];
                ExpressionTree::apply(
                    func,
                    self.build(c, first_child),
                    self.build(c + 1, first_child),
                )
            }
        }
    }
}

/// Multigenic chromosome; sub-trees are linked by addition.
#[derive(Clone, Debug, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<Gene>,
}

impl Chromosome {
    pub fn new(genes: Vec<Gene>) -> Result<Self, KarvaError> {
        let chrom = Chromosome { genes };
        chrom.validate()?;
        Ok(chrom)
    }

    pub fn head_len(&self) -> usize {
        self.genes.first().map_or(0, |g| g.head.len())
    }

    pub fn validate(&self) -> Result<(), KarvaError> {
        let first = self.genes.first().ok_or(KarvaError::EmptyChromosome)?;
        let (h, t) = (first.head.len(), first.tail.len());
        for (index, gene) in self.genes.iter().enumerate() {
            gene.validate()?;
            if gene.head.len() != h || gene.tail.len() != t {
                return Err(KarvaError::ShapeMismatch {
                    index,
                    head: gene.head.len(),
                    tail: gene.tail.len(),
                    expected_head: h,
                    expected_tail: t,
                });
            }
        }
        Ok(())
    }

    pub fn decode(&self) -> Result<Vec<ExpressionTree>, KarvaError> {
        self.genes.iter().map(Gene::decode).collect()
    }

    /// Sum of the gene values at `inputs`; `None` if any gene is non-finite.
    pub fn evaluate(&self, inputs: &[f64]) -> Result<Option<f64>, KarvaError> {
        Ok(self.compile()?.evaluate(inputs))
    }

    /// Decodes every gene once for repeated evaluation.
    pub fn compile(&self) -> Result<CompiledChromosome<'_>, KarvaError> {
        let trees = self.decode()?;
        Ok(CompiledChromosome { chrom: self, trees })
    }

    /// Number of model inputs the expressed trees read (highest index + 1).
    pub fn required_inputs(&self) -> Result<usize, KarvaError> {
        Ok(self
            .decode()?
            .iter()
            .filter_map(ExpressionTree::max_input)
            .max()
            .map_or(0, |m| m + 1))
    }

    /// Human-readable infix form of the linked expression.
    pub fn to_infix(&self) -> Result<String, KarvaError> {
        let parts: Vec<String> = self.decode()?.iter().map(|t| t.to_string()).collect();
        Ok(parts.join(" + "))
    }
}

/// A chromosome with its trees already decoded.
pub struct CompiledChromosome<'a> {
    chrom: &'a Chromosome,
    trees: Vec<ExpressionTree>,
}

impl CompiledChromosome<'_> {
    pub fn evaluate(&self, inputs: &[f64]) -> Option<f64> {
        let mut sum = 0.0;
        for (tree, gene) in self.trees.iter().zip(&self.chrom.genes) {
            sum += tree.evaluate(inputs, &gene.constants)?;
        }
        sum.is_finite().then_some(sum)
    }

    pub fn trees(&self) -> &[ExpressionTree] {
        &self.trees
    }
}

/// Text form: one gene per line, symbol tokens, `|`, then the constant pool.
impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for gene in &self.genes {
            let symbols: Vec<String> = gene.head.iter().chain(&gene.tail).map(|s| s.to_string()).collect();
            let constants: Vec<String> = gene.constants.iter().map(|c| format!("{c:?}")).collect();
            writeln!(f, "{} | {}", symbols.join(" "), constants.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for Chromosome {
    type Err = KarvaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut genes = Vec::new();
        for (idx, raw) in s.lines().enumerate() {
            let line = idx + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| KarvaError::Parse { line, message };
            let (symbols, constants) = text
                .split_once('|')
                .ok_or_else(|| parse_err("missing `|` before the constant pool".into()))?;
            let mut symbols = symbols
                .split_whitespace()
                .map(Symbol::from_str)
                .collect::<Result<Vec<_>, _>>()
                .map_err(parse_err)?;
            let constants = constants
                .split_whitespace()
                .map(|c| c.parse::<f64>().map_err(|e| parse_err(format!("constant `{c}`: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let n = symbols.len();
            if n < 1 + MAX_ARITY || (n - 1) % MAX_ARITY != 0 {
                return Err(parse_err(format!("{n} symbols cannot be split into head and tail")));
            }
            let head_len = (n - 1) / MAX_ARITY;
            let tail = symbols.split_off(head_len);
            let gene = Gene::new(symbols, tail, constants).map_err(|e| parse_err(e.to_string()))?;
            genes.push(gene);
        }
        Chromosome::new(genes)
    }
}
