//! The `tensor1` content dictionary as an OpenMath CD document.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use quick_xml::escape::escape;

use crate::symbols::{TENSOR1, TENSOR1_SYMBOLS};

const CD_NAMESPACE: &str = "http://www.openmath.org/OpenMathCD";

const CD_DESCRIPTION: &str = "Symbols for writing tensor formulas in content markup: \
    tuples and Cartesian frames, basis and component selection with contravariant and \
    covariant indexes, and the Kronecker, metric and Levi-Civita tensors.";

/// The CD document. The output depends only on the symbol table, so it is
/// byte-identical across runs.
pub fn tensor1_cd_xml() -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<CD xmlns=\"{CD_NAMESPACE}\">");
    let _ = writeln!(out, "  <CDName>{TENSOR1}</CDName>");
    out.push_str("  <CDVersion>1</CDVersion>\n");
    out.push_str("  <CDRevision>0</CDRevision>\n");
    out.push_str("  <CDStatus>experimental</CDStatus>\n");
    let _ = writeln!(
        out,
        "  <Description>{}</Description>",
        escape(CD_DESCRIPTION)
    );
    for sym in &TENSOR1_SYMBOLS {
        out.push_str("  <CDDefinition>\n");
        let _ = writeln!(out, "    <Name>{}</Name>", escape(sym.name));
        let _ = writeln!(out, "    <Role>{}</Role>", escape(sym.role));
        let _ = writeln!(
            out,
            "    <Description>{}</Description>",
            escape(sym.description)
        );
        out.push_str("  </CDDefinition>\n");
    }
    out.push_str("</CD>\n");
    out
}

pub fn write_tensor1_cd(path: &Path) -> io::Result<()> {
    std::fs::write(path, tensor1_cd_xml())
}
