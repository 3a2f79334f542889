//! Local feature aggregation: spatial encoding of neighbourhoods, attentive
//! pooling, the dilated residual block and the resampling layers around it.

mod attention;
mod block;
mod locse;
mod pool;
mod resample;

pub use attention::{attention_file_name, dump_attention_matrix, matrix_from_csv, matrix_to_csv};
pub use block::{dilated_residual_block, BlockConfig, BlockParams, UnitParams};
pub use locse::{
    locse, neighborhood_tensors, raw_position_encoding, relative_position_encoding, LocSeConfig, LocSeVariant,
};
pub use pool::{attention_scores, attentive_pool, pool_neighbors, Pooling};
pub use resample::{decimated_count, downsample_layer, interpolate_nearest, upsample_layer, Downsampled};
