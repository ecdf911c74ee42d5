//! The GEP search loop: random initialization, fitness, roulette-wheel
//! selection with single elitism, the genetic operator suite, and termination
//! by generation count or stagnation.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::karva::{tail_length, Chromosome, Function, Gene, KarvaError, Symbol, CONSTANT_POOL_SIZE, MAX_ARITY};

/// Fitness of a perfect fit.
pub const MAX_FITNESS: f64 = 1000.0;

/// Constants are initialized uniformly in `[-CONSTANT_RANGE, CONSTANT_RANGE]`.
pub const CONSTANT_RANGE: f64 = 10.0;

const MAX_TRANSPOSON_LEN: usize = 3;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyData,
    #[error("row {row} has {found} inputs, expected {expected}")]
    RaggedData { row: usize, found: usize, expected: usize },
    #[error("{rows} rows but {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("non-finite value in row {row}")]
    NonFiniteData { row: usize },
    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error(transparent)]
    Karva(#[from] KarvaError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Operator rates. Mutation variants are per symbol (per constant for biased
/// mutation); everything else is per chromosome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub mutation: f64,
    pub conservative_mutation: f64,
    pub permutation: f64,
    pub biased_mutation: f64,
    pub is_transposition: f64,
    pub ris_transposition: f64,
    pub inversion: f64,
    pub uniform_recombination: f64,
    pub one_point_recombination: f64,
    pub two_point_recombination: f64,
    pub gene_recombination: f64,
    pub gene_transposition: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates {
            mutation: 0.0014,
            conservative_mutation: 0.0037,
            permutation: 0.0055,
            biased_mutation: 0.0055,
            is_transposition: 0.0055,
            ris_transposition: 0.0055,
            inversion: 0.0055,
            uniform_recombination: 0.008,
            one_point_recombination: 0.003,
            two_point_recombination: 0.003,
            gene_recombination: 0.003,
            gene_transposition: 0.003,
        }
    }
}

impl Rates {
    pub fn zero() -> Self {
        Rates {
            mutation: 0.0,
            conservative_mutation: 0.0,
            permutation: 0.0,
            biased_mutation: 0.0,
            is_transposition: 0.0,
            ris_transposition: 0.0,
            inversion: 0.0,
            uniform_recombination: 0.0,
            one_point_recombination: 0.0,
            two_point_recombination: 0.0,
            gene_recombination: 0.0,
            gene_transposition: 0.0,
        }
    }

    fn named(&self) -> [(&'static str, f64); 12] {
        [
            ("rate_of_mutation", self.mutation),
            ("conservative_mutation", self.conservative_mutation),
            ("permutation", self.permutation),
            ("biased_mutation", self.biased_mutation),
            ("is_transposition_rate", self.is_transposition),
            ("ris_transposition_rate", self.ris_transposition),
            ("rate_of_inversion", self.inversion),
            ("uniform_recombination", self.uniform_recombination),
            ("one_point_recombination", self.one_point_recombination),
            ("two_point_recombination", self.two_point_recombination),
            ("rate_of_gene_recombination", self.gene_recombination),
            ("rate_of_gene_transposition", self.gene_transposition),
        ]
    }
}

/// Evolution parameters. Defaults are the published optimum (50 chromosomes,
/// head 7, 4 genes, and the operator rates in [`Rates::default`]).
#[derive(Clone, Debug, PartialEq)]
pub struct GepConfig {
    pub num_chromosomes: usize,
    pub head_size: usize,
    pub num_genes: usize,
    pub rates: Rates,
    pub max_generations: usize,
    /// Stop after this many generations without improvement; 0 disables.
    pub stagnation_limit: usize,
    pub rng_seed: u64,
}

impl Default for GepConfig {
    fn default() -> Self {
        GepConfig {
            num_chromosomes: 50,
            head_size: 7,
            num_genes: 4,
            rates: Rates::default(),
            max_generations: 2000,
            stagnation_limit: 500,
            rng_seed: 0,
        }
    }
}

/// On-disk key/value layout, one key per line (TOML syntax).
#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    number_of_chromosomes: usize,
    head_size: usize,
    number_of_genes: usize,
    rate_of_mutation: f64,
    conservative_mutation: f64,
    permutation: f64,
    biased_mutation: f64,
    is_transposition_rate: f64,
    ris_transposition_rate: f64,
    rate_of_inversion: f64,
    uniform_recombination: f64,
    one_point_recombination: f64,
    two_point_recombination: f64,
    rate_of_gene_recombination: f64,
    rate_of_gene_transposition: f64,
    max_generations: usize,
    stagnation_limit: usize,
    seed: u64,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile::from(&GepConfig::default())
    }
}

impl From<&GepConfig> for ConfigFile {
    fn from(c: &GepConfig) -> Self {
        let r = &c.rates;
        ConfigFile {
            number_of_chromosomes: c.num_chromosomes,
            head_size: c.head_size,
            number_of_genes: c.num_genes,
            rate_of_mutation: r.mutation,
            conservative_mutation: r.conservative_mutation,
            permutation: r.permutation,
            biased_mutation: r.biased_mutation,
            is_transposition_rate: r.is_transposition,
            ris_transposition_rate: r.ris_transposition,
            rate_of_inversion: r.inversion,
            uniform_recombination: r.uniform_recombination,
            one_point_recombination: r.one_point_recombination,
            two_point_recombination: r.two_point_recombination,
            rate_of_gene_recombination: r.gene_recombination,
            rate_of_gene_transposition: r.gene_transposition,
            max_generations: c.max_generations,
            stagnation_limit: c.stagnation_limit,
            seed: c.rng_seed,
        }
    }
}

impl From<ConfigFile> for GepConfig {
    fn from(f: ConfigFile) -> Self {
        GepConfig {
            num_chromosomes: f.number_of_chromosomes,
            head_size: f.head_size,
            num_genes: f.number_of_genes,
            rates: Rates {
                mutation: f.rate_of_mutation,
                conservative_mutation: f.conservative_mutation,
                permutation: f.permutation,
                biased_mutation: f.biased_mutation,
                is_transposition: f.is_transposition_rate,
                ris_transposition: f.ris_transposition_rate,
                inversion: f.rate_of_inversion,
                uniform_recombination: f.uniform_recombination,
                one_point_recombination: f.one_point_recombination,
                two_point_recombination: f.two_point_recombination,
                gene_recombination: f.rate_of_gene_recombination,
                gene_transposition: f.rate_of_gene_transposition,
            },
            max_generations: f.max_generations,
            stagnation_limit: f.stagnation_limit,
            rng_seed: f.seed,
        }
    }
}

impl GepConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: String| Err(EvolutionError::InvalidConfig(m));
        if self.num_chromosomes < 2 {
            return bad(format!("number_of_chromosomes = {} (need >= 2)", self.num_chromosomes));
        }
        if self.num_genes < 1 {
            return bad("number_of_genes must be >= 1".into());
        }
        if self.head_size < 1 {
            return bad("head_size must be >= 1".into());
        }
        for (name, rate) in self.rates.named() {
            if !(0.0..=1.0).contains(&rate) {
                return bad(format!("{name} = {rate} is outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Parses the key/value config text. Missing keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, EvolutionError> {
        let file: ConfigFile = toml::from_str(text)?;
        let config = GepConfig::from(file);
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ConfigFile::from(self)).expect("flat config always serializes")
    }

    pub fn gene_len(&self) -> usize {
        self.head_size + self.head_size * (MAX_ARITY - 1) + 1
    }
}

/// Input rows and regression targets.
#[derive(Clone, Debug)]
pub struct TrainingData {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl TrainingData {
    pub fn new(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, EvolutionError> {
        if rows.is_empty() {
            return Err(EvolutionError::EmptyData);
        }
        if rows.len() != targets.len() {
            return Err(EvolutionError::LengthMismatch { rows: rows.len(), targets: targets.len() });
        }
        let expected = rows[0].len();
        for (row, (x, y)) in rows.iter().zip(&targets).enumerate() {
            if x.len() != expected {
                return Err(EvolutionError::RaggedData { row, found: x.len(), expected });
            }
            if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
                return Err(EvolutionError::NonFiniteData { row });
            }
        }
        Ok(TrainingData { rows, targets })
    }

    pub fn num_inputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

/// Terminal and function symbols available to the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabet {
    pub num_inputs: usize,
    pub num_constants: usize,
}

impl Alphabet {
    pub fn new(num_inputs: usize) -> Self {
        Alphabet { num_inputs, num_constants: CONSTANT_POOL_SIZE }
    }

    fn num_terminals(&self) -> usize {
        self.num_inputs + self.num_constants
    }

    pub fn random_terminal<R: Rng + ?Sized>(&self, rng: &mut R) -> Symbol {
        self.terminal(rng.random_range(0..self.num_terminals()))
    }

    pub fn random_function<R: Rng + ?Sized>(&self, rng: &mut R) -> Symbol {
        Symbol::Func(Function::ALL[rng.random_range(0..Function::ALL.len())])
    }

    /// Uniform over functions and terminals.
    pub fn random_head_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> Symbol {
        let k = rng.random_range(0..Function::ALL.len() + self.num_terminals());
        match k.checked_sub(Function::ALL.len()) {
            None => Symbol::Func(Function::ALL[k]),
            Some(t) => self.terminal(t),
        }
    }

    fn terminal(&self, t: usize) -> Symbol {
        if t < self.num_inputs {
            Symbol::Input(t as u8)
        } else {
            Symbol::Const((t - self.num_inputs) as u8)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitnessReport {
    /// `1000 / (1 + rmse)`, or 0 when any prediction is non-finite.
    pub fitness: f64,
    /// `None` when the chromosome produced a non-finite prediction.
    pub rmse: Option<f64>,
}

impl FitnessReport {
    pub fn from_rmse(rmse: f64) -> Self {
        if rmse.is_finite() {
            FitnessReport { fitness: MAX_FITNESS * (1.0 / (1.0 + rmse)), rmse: Some(rmse) }
        } else {
            FitnessReport::penalized()
        }
    }

    pub fn penalized() -> Self {
        FitnessReport { fitness: 0.0, rmse: None }
    }
}

/// Scores a chromosome against the data.
pub fn fitness(chrom: &Chromosome, data: &TrainingData) -> Result<FitnessReport, EvolutionError> {
    let compiled = chrom.compile()?;
    let mut sum_sq = 0.0;
    for (x, y) in data.rows.iter().zip(&data.targets) {
        match compiled.evaluate(x) {
            Some(p) => sum_sq += (p - y) * (p - y),
            None => return Ok(FitnessReport::penalized()),
        }
    }
    Ok(FitnessReport::from_rmse((sum_sq / data.len() as f64).sqrt()))
}

fn random_gene<R: Rng + ?Sized>(head_size: usize, alphabet: &Alphabet, rng: &mut R) -> Gene {
    let tail_len = tail_length(head_size, MAX_ARITY).expect("head_size >= 1");
    Gene {
        head: (0..head_size).map(|_| alphabet.random_head_symbol(rng)).collect(),
        tail: (0..tail_len).map(|_| alphabet.random_terminal(rng)).collect(),
        constants: (0..alphabet.num_constants)
            .map(|_| rng.random_range(-CONSTANT_RANGE..=CONSTANT_RANGE))
            .collect(),
    }
}

/// Random initial population.
pub fn initialize<R: Rng + ?Sized>(config: &GepConfig, alphabet: &Alphabet, rng: &mut R) -> Vec<Chromosome> {
    (0..config.num_chromosomes)
        .map(|_| Chromosome {
            genes: (0..config.num_genes).map(|_| random_gene(config.head_size, alphabet, rng)).collect(),
        })
        .collect()
}

/// Index of the highest fitness; ties go to the lowest index.
pub fn best_index(fitnesses: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitnesses.iter().enumerate() {
        if f > fitnesses[best] {
            best = i;
        }
    }
    best
}

/// Builds the next parent pool: slot 0 is an unchanged copy of the best
/// chromosome, the rest are drawn by roulette wheel (uniformly if every
/// fitness is zero).
pub fn select<R: Rng + ?Sized>(population: &[Chromosome], fitnesses: &[f64], rng: &mut R) -> Vec<Chromosome> {
    assert_eq!(population.len(), fitnesses.len());
    let n = population.len();
    let mut pool = Vec::with_capacity(n);
    pool.push(population[best_index(fitnesses)].clone());
    let wheel = WeightedIndex::new(fitnesses.iter().copied()).ok();
    for _ in 1..n {
        let pick = match &wheel {
            Some(w) => w.sample(rng),
            None => rng.random_range(0..n),
        };
        pool.push(population[pick].clone());
    }
    pool
}

pub fn mutate<R: Rng + ?Sized>(chrom: &mut Chromosome, rate: f64, alphabet: &Alphabet, rng: &mut R) {
    for gene in &mut chrom.genes {
        for s in &mut gene.head {
            if rng.random_bool(rate) {
                *s = alphabet.random_head_symbol(rng);
            }
        }
        for s in &mut gene.tail {
            if rng.random_bool(rate) {
                *s = alphabet.random_terminal(rng);
            }
        }
    }
}

/// Resamples within the symbol's class: functions stay functions, terminals
/// stay terminals.
pub fn conservative_mutate<R: Rng + ?Sized>(chrom: &mut Chromosome, rate: f64, alphabet: &Alphabet, rng: &mut R) {
    for gene in &mut chrom.genes {
        for s in gene.head.iter_mut().chain(gene.tail.iter_mut()) {
            if rng.random_bool(rate) {
                *s = if s.is_terminal() {
                    alphabet.random_terminal(rng)
                } else {
                    alphabet.random_function(rng)
                };
            }
        }
    }
}

/// Adds unit Gaussian noise to pool constants.
pub fn biased_mutate<R: Rng + ?Sized>(chrom: &mut Chromosome, rate: f64, rng: &mut R) {
    for gene in &mut chrom.genes {
        for c in &mut gene.constants {
            if rng.random_bool(rate) {
                let noise: f64 = rng.sample(StandardNormal);
                *c += noise;
            }
        }
    }
}

pub fn permute<R: Rng + ?Sized>(chrom: &mut Chromosome, rng: &mut R) {
    let g = rng.random_range(0..chrom.genes.len());
    let head = &mut chrom.genes[g].head;
    if head.len() < 2 {
        return;
    }
    let i = rng.random_range(0..head.len());
    let j = rng.random_range(0..head.len() - 1);
    let j = if j >= i { j + 1 } else { j };
    head.swap(i, j);
}

pub fn invert<R: Rng + ?Sized>(chrom: &mut Chromosome, rng: &mut R) {
    let g = rng.random_range(0..chrom.genes.len());
    let head = &mut chrom.genes[g].head;
    if head.len() < 2 {
        return;
    }
    let a = rng.random_range(0..head.len());
    let b = rng.random_range(0..head.len());
    let (start, end) = (a.min(b), a.max(b));
    head[start..=end].reverse();
}

/// Inserts `segment` into `head` at `at`, shifting right and dropping
/// whatever falls off the end of the head.
fn insert_into_head(head: &mut Vec<Symbol>, at: usize, segment: &[Symbol]) {
    let len = head.len();
    let mut spliced = Vec::with_capacity(len + segment.len());
    spliced.extend_from_slice(&head[..at]);
    spliced.extend_from_slice(segment);
    spliced.extend_from_slice(&head[at..]);
    spliced.truncate(len);
    *head = spliced;
}

/// Insertion-sequence transposition: copies a short segment from anywhere in
/// the chromosome to a non-root head position.
pub fn is_transpose<R: Rng + ?Sized>(chrom: &mut Chromosome, rng: &mut R) {
    let head_len = chrom.head_len();
    if head_len < 2 {
        return;
    }
    let src = &chrom.genes[rng.random_range(0..chrom.genes.len())];
    let start = rng.random_range(0..src.len());
    let seg_len = rng.random_range(1..=MAX_TRANSPOSON_LEN).min(src.len() - start);
    let segment: Vec<Symbol> = (start..start + seg_len).map(|i| src.symbol(i)).collect();
    let target = rng.random_range(0..chrom.genes.len());
    let at = rng.random_range(1..head_len);
    insert_into_head(&mut chrom.genes[target].head, at, &segment);
}

/// Root insertion-sequence transposition: copies a function-rooted segment
/// to the start of the head.
pub fn ris_transpose<R: Rng + ?Sized>(chrom: &mut Chromosome, rng: &mut R) {
    let g = rng.random_range(0..chrom.genes.len());
    let gene = &mut chrom.genes[g];
    let start = rng.random_range(0..gene.head.len());
    let Some(offset) = gene.head[start..].iter().position(|s| !s.is_terminal()) else {
        return;
    };
    let first = start + offset;
    let seg_len = rng.random_range(1..=MAX_TRANSPOSON_LEN).min(gene.len() - first);
    let segment: Vec<Symbol> = (first..first + seg_len).map(|i| gene.symbol(i)).collect();
    insert_into_head(&mut gene.head, 0, &segment);
}

/// Moves a non-first gene, constants included, to the front.
pub fn gene_transpose<R: Rng + ?Sized>(chrom: &mut Chromosome, rng: &mut R) {
    if chrom.genes.len() < 2 {
        return;
    }
    let k = rng.random_range(1..chrom.genes.len());
    let gene = chrom.genes.remove(k);
    chrom.genes.insert(0, gene);
}

fn swap_symbol(a: &mut Chromosome, b: &mut Chromosome, position: usize, gene_len: usize) {
    let (g, i) = (position / gene_len, position % gene_len);
    std::mem::swap(a.genes[g].symbol_mut(i), b.genes[g].symbol_mut(i));
}

fn swap_pools(a: &mut Chromosome, b: &mut Chromosome, g: usize) {
    std::mem::swap(&mut a.genes[g].constants, &mut b.genes[g].constants);
}

/// Exchanges everything from a random cut point to the end.
pub fn one_point_recombine<R: Rng + ?Sized>(a: &mut Chromosome, b: &mut Chromosome, rng: &mut R) {
    let gene_len = a.genes[0].len();
    let total = gene_len * a.genes.len();
    let cut = rng.random_range(1..total);
    for p in cut..total {
        swap_symbol(a, b, p, gene_len);
    }
    for g in 0..a.genes.len() {
        if g * gene_len >= cut {
            swap_pools(a, b, g);
        }
    }
}

/// Exchanges the segment between two random cut points.
pub fn two_point_recombine<R: Rng + ?Sized>(a: &mut Chromosome, b: &mut Chromosome, rng: &mut R) {
    let gene_len = a.genes[0].len();
    let total = gene_len * a.genes.len();
    let x = rng.random_range(0..=total);
    let y = rng.random_range(0..=total);
    let (lo, hi) = (x.min(y), x.max(y));
    for p in lo..hi {
        swap_symbol(a, b, p, gene_len);
    }
    for g in 0..a.genes.len() {
        if g * gene_len >= lo && (g + 1) * gene_len <= hi {
            swap_pools(a, b, g);
        }
    }
}

/// Per-position coin flip; each gene's constant pool is flipped the same way.
pub fn uniform_recombine<R: Rng + ?Sized>(a: &mut Chromosome, b: &mut Chromosome, rng: &mut R) {
    let gene_len = a.genes[0].len();
    for p in 0..gene_len * a.genes.len() {
        if rng.random_bool(0.5) {
            swap_symbol(a, b, p, gene_len);
        }
    }
    for g in 0..a.genes.len() {
        if rng.random_bool(0.5) {
            swap_pools(a, b, g);
        }
    }
}

pub fn gene_recombine<R: Rng + ?Sized>(a: &mut Chromosome, b: &mut Chromosome, rng: &mut R) {
    let g = rng.random_range(0..a.genes.len());
    std::mem::swap(&mut a.genes[g], &mut b.genes[g]);
}

fn pair_mut<T>(items: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (lo, hi) = items.split_at_mut(j);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = items.split_at_mut(i);
        (&mut hi[0], &mut lo[j])
    }
}

type Crossover<R> = fn(&mut Chromosome, &mut Chromosome, &mut R);

fn recombine_population<R: Rng + ?Sized>(population: &mut [Chromosome], rate: f64, op: Crossover<R>, rng: &mut R) {
    let n = population.len();
    if n < 2 {
        return;
    }
    for i in 0..n {
        if rng.random_bool(rate) {
            let j = rng.random_range(0..n - 1);
            let j = if j >= i { j + 1 } else { j };
            let (a, b) = pair_mut(population, i, j);
            op(a, b, rng);
        }
    }
}

/// Applies the whole operator suite in its fixed order.
pub fn apply_operators<R: Rng + ?Sized>(
    population: &mut [Chromosome],
    rates: &Rates,
    alphabet: &Alphabet,
    rng: &mut R,
) {
    for chrom in population.iter_mut() {
        mutate(chrom, rates.mutation, alphabet, rng);
        conservative_mutate(chrom, rates.conservative_mutation, alphabet, rng);
        biased_mutate(chrom, rates.biased_mutation, rng);
        if rng.random_bool(rates.permutation) {
            permute(chrom, rng);
        }
        if rng.random_bool(rates.inversion) {
            invert(chrom, rng);
        }
        if rng.random_bool(rates.is_transposition) {
            is_transpose(chrom, rng);
        }
        if rng.random_bool(rates.ris_transposition) {
            ris_transpose(chrom, rng);
        }
        if rng.random_bool(rates.gene_transposition) {
            gene_transpose(chrom, rng);
        }
    }
    recombine_population(population, rates.one_point_recombination, one_point_recombine, rng);
    recombine_population(population, rates.two_point_recombination, two_point_recombine, rng);
    recombine_population(population, rates.uniform_recombination, uniform_recombine, rng);
    recombine_population(population, rates.gene_recombination, gene_recombine, rng);
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub best: Chromosome,
    pub report: FitnessReport,
    /// One entry per completed generation (the initial population is not
    /// counted as a generation).
    pub history: Vec<GenerationStats>,
}

impl RunOutcome {
    pub fn write_history_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["generation", "best_fitness", "mean_fitness"])?;
        for h in &self.history {
            w.write_record([h.generation.to_string(), format!("{:?}", h.best_fitness), format!("{:?}", h.mean_fitness)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn evaluate_population(population: &[Chromosome], data: &TrainingData) -> Result<Vec<FitnessReport>, EvolutionError> {
    population.par_iter().map(|c| fitness(c, data)).collect()
}

/// Runs the search seeded from `config.rng_seed`.
pub fn run(config: &GepConfig, data: &TrainingData) -> Result<RunOutcome, EvolutionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    run_with_rng(config, data, &mut rng)
}

pub fn run_with_rng<R: Rng + ?Sized>(
    config: &GepConfig,
    data: &TrainingData,
    rng: &mut R,
) -> Result<RunOutcome, EvolutionError> {
    config.validate()?;
    let alphabet = Alphabet::new(data.num_inputs());
    let mut population = initialize(config, &alphabet, rng);
    let mut reports = evaluate_population(&population, data)?;
    let mut fits: Vec<f64> = reports.iter().map(|r| r.fitness).collect();
    let b = best_index(&fits);
    let (mut best, mut best_report) = (population[b].clone(), reports[b]);
    let mut history = Vec::new();
    let mut stale = 0;

    for generation in 1..=config.max_generations {
        if best_report.fitness >= MAX_FITNESS {
            break;
        }
        let mut next = select(&population, &fits, rng);
        apply_operators(&mut next[1..], &config.rates, &alphabet, rng);
        population = next;
        reports = evaluate_population(&population, data)?;
        fits = reports.iter().map(|r| r.fitness).collect();

        let b = best_index(&fits);
        if fits[b] > best_report.fitness {
            best = population[b].clone();
            best_report = reports[b];
            stale = 0;
        } else {
            stale += 1;
        }
        history.push(GenerationStats {
            generation,
            best_fitness: fits[b],
            mean_fitness: fits.iter().sum::<f64>() / fits.len() as f64,
        });
        if config.stagnation_limit > 0 && stale >= config.stagnation_limit {
            break;
        }
    }
    Ok(RunOutcome { best, report: best_report, history })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub genes: usize,
    pub head: usize,
    pub fitness: f64,
}

/// Seed used for one sweep cell; a pure function of the base seed and cell.
pub fn cell_seed(base: u64, genes: usize, head: usize) -> u64 {
    let key = ((genes as u64) << 32) | head as u64;
    base ^ key.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Best fitness over a genes x head-size grid, genes-major order.
pub fn sweep(
    base: &GepConfig,
    data: &TrainingData,
    gene_counts: &[usize],
    head_sizes: &[usize],
) -> Result<Vec<SweepCell>, EvolutionError> {
    if gene_counts.is_empty() || head_sizes.is_empty() {
        return Err(EvolutionError::InvalidConfig("sweep grids must be nonempty".into()));
    }
    let cells: Vec<(usize, usize)> = gene_counts
        .iter()
        .flat_map(|&g| head_sizes.iter().map(move |&h| (g, h)))
        .collect();
    cells
        .par_iter()
        .map(|&(genes, head)| {
            let config = GepConfig {
                num_genes: genes,
                head_size: head,
                rng_seed: cell_seed(base.rng_seed, genes, head),
                ..base.clone()
            };
            let outcome = run(&config, data)?;
            Ok(SweepCell { genes, head, fitness: outcome.report.fitness })
        })
        .collect()
}

/// Highest-fitness cell; earliest in grid order on ties.
pub fn sweep_argmax(cells: &[SweepCell]) -> Option<SweepCell> {
    let fits: Vec<f64> = cells.iter().map(|c| c.fitness).collect();
    (!cells.is_empty()).then(|| cells[best_index(&fits)])
}

pub fn write_sweep_csv<W: Write>(cells: &[SweepCell], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["genes", "head", "fitness"])?;
    for c in cells {
        w.write_record([c.genes.to_string(), c.head.to_string(), format!("{:?}", c.fitness)])?;
    }
    w.flush()?;
    Ok(())
}
