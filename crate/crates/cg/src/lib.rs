//! cg — a context-graph engine.
//!
//! Knowledge lives in *theories*: ordered declarations `name : type =
//! definiens` over a small dependently-typed framework with judgments as
//! types. Theories connect into a graph by includes and *views*
//! (typed translations whose axioms become proof obligations). Applying a
//! rule or precedent to a case is a *pushout* of the rule's include edge
//! against a view from its conditions into the case, which generates the
//! ruling theory mechanically. Defeasible reasoning comes from an assumption
//! judgment: proving the contrary of an assumption yields attack edges, and
//! argumentation labelings over the resulting graph decide which contexts
//! stand. A small view finder suggests analogies between theories.

pub mod analogy;
pub mod argue;
pub mod cli;
pub mod graph;
pub mod kernel;
pub mod pushout;
pub mod span;
pub mod syntax;
