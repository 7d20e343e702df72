//! Jolie services for projected process programs.
//!
//! Each network process becomes one `service` block. Message operations are
//! named by [`assign_operation_names`]; [`emit_service`] then follows the
//! behaviour tree node by node.

mod jolie;
mod names;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ident::{is_ident, ProcessId};
use crate::path::ProcLoc;
use crate::sp::{validate_proc_program, ProcProgram, ProcWellFormednessError};

pub use jolie::{emit_service, render_expr, FILE_HEADER};
pub use names::{assign_operation_names, MessagePoint, OperationName, OperationNames};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputLayout {
    SingleFile,
    #[default]
    FilePerService,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodegenConfig {
    /// Port of the first network process; process `i` listens on
    /// `base_port + i`.
    pub base_port: u16,
    pub layout: OutputLayout,
    pub default_op_prefix: String,
}

impl Default for CodegenConfig {
    fn default() -> Self {
        Self {
            base_port: 9000,
            layout: OutputLayout::default(),
            default_op_prefix: "op".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("invalid process program: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidProgram(Vec<ProcWellFormednessError>),
    #[error("base port {base_port} leaves no room for {processes} processes")]
    PortRange { base_port: u16, processes: usize },
    #[error("operation prefix {0:?} is not an identifier")]
    InvalidPrefix(String),
    #[error("{loc}: operation name {name:?} is not an identifier")]
    InvalidOperationName { loc: ProcLoc, name: String },
    #[error("{loc}: cannot pair this message point of {pid} with a unique partner")]
    PairingMismatch { pid: ProcessId, loc: ProcLoc },
    #[error("pairing search exceeds {0} states")]
    PairingSearchLimit(usize),
    #[error("process {receiver} uses operation {name} for incompatible receive points")]
    DuplicateOperation {
        receiver: ProcessId,
        name: OperationName,
    },
    #[error("opaque expression at {pid} cannot be pasted into the output: {text:?}")]
    OpaqueExprUnsupported { pid: ProcessId, text: String },
    #[error("output file {0} would be written twice")]
    FileNameClash(String),
}

/// Generates one service per network process, in network order.
pub fn compile(
    p: &ProcProgram,
    cfg: &CodegenConfig,
) -> Result<IndexMap<ProcessId, String>, CodegenError> {
    let errors = validate_proc_program(p);
    if !errors.is_empty() {
        return Err(CodegenError::InvalidProgram(errors));
    }
    if usize::from(cfg.base_port) + p.network.len() > usize::from(u16::MAX) {
        return Err(CodegenError::PortRange {
            base_port: cfg.base_port,
            processes: p.network.len(),
        });
    }
    if !is_ident(&cfg.default_op_prefix) {
        return Err(CodegenError::InvalidPrefix(cfg.default_op_prefix.clone()));
    }
    let names = assign_operation_names(p, cfg)?;
    p.network
        .pids()
        .map(|pid| Ok((pid.clone(), emit_service(p, pid, &names, cfg)?)))
        .collect()
}

/// File names and contents for `services` under `layout`.
pub fn output_files(
    services: &IndexMap<ProcessId, String>,
    layout: OutputLayout,
) -> Result<Vec<(String, String)>, CodegenError> {
    match layout {
        OutputLayout::SingleFile => {
            let blocks: Vec<&str> = services.values().map(String::as_str).collect();
            Ok(vec![(
                "services.ol".into(),
                format!("{FILE_HEADER}\n{}", blocks.join("\n")),
            )])
        }
        OutputLayout::FilePerService => {
            let mut files: Vec<(String, String)> = Vec::new();
            for (pid, text) in services {
                let name = format!("{}.ol", pid.as_str().to_lowercase());
                if files.iter().any(|(n, _)| *n == name) {
                    return Err(CodegenError::FileNameClash(name));
                }
                files.push((name, format!("{FILE_HEADER}\n{text}")));
            }
            Ok(files)
        }
    }
}
