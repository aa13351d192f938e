//! CSV datasets, SVG plots and run manifests.

mod datasets;
mod manifest;
mod svg;
mod table;

pub use datasets::*;
pub use manifest::{sha256_file, unix_now, verify_manifest, RunManifest, MANIFEST_FILE};
pub use svg::{emit_svg_plot, render_svg, PlotSpec};
pub use table::{read_csv, write_csv, Cell, Kind, Schema, Table};
