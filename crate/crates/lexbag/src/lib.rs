//! lexbag — a desk-scale machine translation engine unifying the
//! example-based and lexicalist traditions.
//!
//! The pipeline: a bilingual lookup over the input prioritizes the chart
//! parser's agenda; transfer finds exact multiset covers of the parsed
//! source bag by bilingual entries, ranked by cardinality; generation
//! linearizes the target bag under the target grammar's constraints
//! (shake-and-bake style).
//!
//! Everything is deterministic: prioritization and ranking change only
//! the order in which translations appear, never the set of results.

pub mod bkb;
pub mod engine;
pub mod generator;
pub mod grammar;
pub mod lexicon;
pub mod parser;
pub mod sign;
pub mod transfer;

pub use bkb::{Bkb, BilingualEntry, Match, MatchSemantics};
pub use engine::{EngineConfig, Resources, Translation};
pub use grammar::Grammar;
pub use lexicon::Lexicon;
pub use parser::{AgendaPlan, Parse};
pub use sign::{Bag, Binding, NodeId, Sign};
pub use transfer::{Cover, RankStrategy, TargetBag};
