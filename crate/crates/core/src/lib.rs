//! Multitask kernel online learning under a hard active-set budget.
//!
//! Tasks are related through an undirected graph `G`; the multitask kernel
//! `K([x,i],[x',j]) = (I + L_G)⁻¹_ij · K'(x,x')` lets a mistake on one task
//! move the predictors of its neighbours. Four learners keep at most `B`
//! stored instances: two projection-based (`mtbprj`, `mtbprj-2`), one with
//! random eviction (`mtrbp`), and one that forgets the oldest instance and
//! shrinks (`mtforg`).
//!
//! Numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the precision for common use.

pub mod active_set;
pub mod graph;
pub mod harness;
pub mod kernel;
pub mod learners;
pub mod linalg;
pub mod scalar;

pub use active_set::{ActiveSet, ActiveSetError, EntryWeight, TaskWeights};
pub use harness::{BudgetSpec, DatasetStream, HarnessError, ReferenceTaskSet, StreamMetrics, SyntheticConfig};
pub use graph::{GraphError, GraphSpec, InteractionModel, ResistanceMatrix, TaskGraph};
pub use kernel::{KernelMode, KernelSpec, Label, MultitaskExample, MultitaskInstance, MultitaskKernel, SparseVector};
pub use learners::{Action, Algorithm, Learner, LearnerConfig, LearnerError, OnlineLearner, StepOutcome};
pub use linalg::DenseMatrix;
pub use scalar::Scalar;

pub type InteractionModel64 = InteractionModel<f64>;
pub type InteractionModel32 = InteractionModel<f32>;
pub type KernelSpec64 = KernelSpec<f64>;
pub type KernelSpec32 = KernelSpec<f32>;
pub type SparseVector64 = SparseVector<f64>;
pub type SparseVector32 = SparseVector<f32>;
pub type Example64 = MultitaskExample<f64>;
pub type Example32 = MultitaskExample<f32>;
pub type ActiveSet64 = ActiveSet<f64>;
pub type ActiveSet32 = ActiveSet<f32>;
pub type LearnerConfig64 = LearnerConfig<f64>;
pub type LearnerConfig32 = LearnerConfig<f32>;
pub type Learner64 = Learner<f64>;
pub type Learner32 = Learner<f32>;
pub type DatasetStream64 = DatasetStream<f64>;
pub type DatasetStream32 = DatasetStream<f32>;
