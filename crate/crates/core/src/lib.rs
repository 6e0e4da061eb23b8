//! JATS to BioC conversion toolkit.
//!
//! * [`model`]: the BioC data model and its validity rules
//! * [`serial`]: BioC XML and BioC JSON readers and writers
//! * [`jats`]: JATS article flattening into typed passages
//! * [`outline`]: section tree recovery from `title_N` passages
//! * [`translit`]: Unicode to ASCII translation
//! * [`store`]: file-backed article store, id resolution and bulk ingestion
//! * [`service`]: HTTP retrieval service over a store

pub mod jats;
pub mod model;
pub mod outline;
pub mod serial;
pub mod service;
pub mod store;
pub mod translit;

pub use jats::{convert, ConversionOptions, ConvertError, JatsSourceInfo};
pub use model::{
    Annotation, Collection, Document, InfonMap, Location, Node, Passage, Relation, Sentence,
};
pub use outline::{build_outline, flatten_outline, SectionNode};
pub use serial::{from_json, from_xml, to_json, to_xml, SerialError, SerializationFormat};
pub use service::{ApiRequest, ApiResponse, Service};
pub use store::{CollectionStats, IdIndex, IngestReport, SourceSet, Store, StoreError};
pub use translit::{to_ascii, Encoding, TranslitTable};
