use crate::error::{Error, Result};
use crate::numerics::Rng64;
use crate::tasks::SequenceDataset;

/// Number of marked indices per sample; the label counts the marked ones.
pub const N_MARKS: usize = 9;
/// Labels range over 0..=9.
pub const N_CLASSES: usize = 10;

/// Whether generated label frequencies follow the natural Binomial(9, 0.5)
/// profile or are rejection-sampled to an exactly uniform histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceMode {
    Natural,
    Balanced,
}

/// Construction parameters for the Binary Adding task: a value channel x1 of
/// T coin flips and a mark channel x2 with exactly nine ones; the label is
/// the sum of x1 at the marked positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryAddingSpec {
    pub steps: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
    pub balance: BalanceMode,
}

impl BinaryAddingSpec {
    /// The published task sizes: 50,000 train / 2,000 test samples.
    pub fn standard(steps: usize, seed: u64, balance: BalanceMode) -> Self {
        BinaryAddingSpec {
            steps,
            train_size: 50_000,
            test_size: 2_000,
            seed,
            balance,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 10 {
            return Err(Error::InvalidArgument(format!(
                "binary adding needs T >= 10 to place {N_MARKS} marks, got T={}",
                self.steps
            )));
        }
        if self.balance == BalanceMode::Balanced
            && (self.train_size % N_CLASSES != 0 || self.test_size % N_CLASSES != 0)
        {
            return Err(Error::InvalidArgument(
                "balanced mode needs split sizes divisible by 10".into(),
            ));
        }
        Ok(())
    }
}

/// The literal label definition, used as an independent oracle to revalidate
/// every generated sample.
pub fn brute_force_label(x1: &[u8], x2: &[u8]) -> Result<usize> {
    if x1.len() != x2.len() {
        return Err(Error::ShapeMismatch(format!(
            "channel lengths differ: {} vs {}",
            x1.len(),
            x2.len()
        )));
    }
    let marks = x2.iter().filter(|&&m| m == 1).count();
    if marks != N_MARKS || x2.iter().any(|&m| m > 1) {
        return Err(Error::InvalidArgument(format!(
            "mark channel must hold exactly {N_MARKS} ones, found {marks}"
        )));
    }
    Ok(x1
        .iter()
        .zip(x2)
        .map(|(&a, &b)| (a & b) as usize)
        .sum())
}

fn draw_sample(rng: &mut Rng64, steps: usize) -> (Vec<u8>, Vec<u8>, usize) {
    let x1: Vec<u8> = (0..steps)
        .map(|_| rng.below(2).expect("k=2") as u8)
        .collect();
    let marks = rng.choose_k(steps, N_MARKS).expect("T >= 10");
    let mut x2 = vec![0u8; steps];
    for m in marks {
        x2[m] = 1;
    }
    let label = x1
        .iter()
        .zip(&x2)
        .map(|(&a, &b)| (a & b) as usize)
        .sum();
    (x1, x2, label)
}

fn gen_split(
    task: &str,
    spec: &BinaryAddingSpec,
    size: usize,
    seed: u64,
) -> Result<SequenceDataset> {
    let steps = spec.steps;
    let mut rng = Rng64::new(seed);
    let mut inputs = Vec::with_capacity(size * steps * 2);
    let mut labels = Vec::with_capacity(size);
    match spec.balance {
        BalanceMode::Natural => {
            for _ in 0..size {
                let (x1, x2, y) = draw_sample(&mut rng, steps);
                push_sample(&mut inputs, &x1, &x2);
                labels.push(y as u16);
            }
        }
        BalanceMode::Balanced => {
            // rejection-sample whole samples until every bucket hits quota
            let quota = size / N_CLASSES;
            let mut counts = [0usize; N_CLASSES];
            while labels.len() < size {
                let (x1, x2, y) = draw_sample(&mut rng, steps);
                if counts[y] < quota {
                    counts[y] += 1;
                    push_sample(&mut inputs, &x1, &x2);
                    labels.push(y as u16);
                }
            }
        }
    }
    SequenceDataset::new(task, spec.seed, size, steps, 2, N_CLASSES, inputs, labels)
}

fn push_sample(inputs: &mut Vec<f32>, x1: &[u8], x2: &[u8]) {
    for (a, b) in x1.iter().zip(x2) {
        inputs.push(*a as f32);
        inputs.push(*b as f32);
    }
}

/// Generate the train and test splits from disjoint RNG substreams
/// (seed, seed + 1). Fully determined by the spec.
pub fn gen_binary_adding(
    spec: &BinaryAddingSpec,
) -> Result<(SequenceDataset, SequenceDataset)> {
    spec.validate()?;
    let train = gen_split("binary-adding-train", spec, spec.train_size, spec.seed)?;
    let test = gen_split(
        "binary-adding-test",
        spec,
        spec.test_size,
        spec.seed.wrapping_add(1),
    )?;
    Ok((train, test))
}
