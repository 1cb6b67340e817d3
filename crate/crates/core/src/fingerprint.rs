//! Content hashes used to tie traces, cases and manifests to their inputs.

use sha2::{Digest, Sha256};

use crate::ast::{ClassDecl, MethodDecl};
use crate::printer::print_method;

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Fingerprint of a method's canonical text, qualified by its class name.
///
/// Spans do not participate, so reformatting the source keeps the value.
pub fn method_fingerprint(class: &ClassDecl, method: &MethodDecl) -> String {
    let mut text = format!("{}::", class.name);
    print_method(&mut text, method, 0);
    sha256_hex(text.as_bytes())[..16].to_string()
}
