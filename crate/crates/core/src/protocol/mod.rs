//! One-round quantize-and-average protocol: plan, per-machine encoding,
//! message framing and central decoding.

mod codec;
mod message;
mod plan;

pub(crate) use codec::encode_with;
pub use codec::{central_decode, central_decode_with, local_encode, Divisor, Estimate};
pub use message::{read_transcript, write_transcript, BitReader, BitWriter, Message, MAGIC};
pub use plan::{coverage_count, index_set, plan, quantizer_width, replication_count, ProtocolPlan};
