//! Half-cube face lattice, its complete acyclic Morse matching, and explicit
//! integral homology bases for the subcomplexes `C(n, k)`.
//!
//! ```
//! use halfcube_core::{enumerate_faces, morse, subcomplex};
//!
//! let table = enumerate_faces(5).unwrap();
//! let matching = morse::build_matching(&table).unwrap();
//! let c53 = subcomplex::build_subcomplex(&table, &matching, 3).unwrap();
//! assert_eq!(c53.unmatched.len(), 31);
//! ```

pub mod chain;
pub mod exact;
pub mod face;
pub mod morse;
pub mod snf;
pub mod subcomplex;

pub use chain::{BoundaryMatrix, ChainComplex, ChainError, ChainVector, OrientationFrame};
pub use face::{
    enumerate_faces, parse_seq, FaceError, FaceId, FaceKind, FaceRecord, FaceSeq, FaceTable,
    Symbol,
};
pub use morse::{build_matching, match_face, MorseError, MorseMatching};
pub use snf::{smith_normal_form, HomologyReport, SnfError, SnfResult};
pub use subcomplex::{betti_eq11, betti_eq12, build_subcomplex, SubcomplexError, SubcomplexSpec};
