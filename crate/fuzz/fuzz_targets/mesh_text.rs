//! The mesh text parser must reject malformed input with an error — never
//! a panic — and everything it accepts must round-trip through the
//! printer.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(mesh) = eigenbox::mesh::Mesh::parse_text(text) {
        let reprinted = mesh.to_text();
        let again = eigenbox::mesh::Mesh::parse_text(&reprinted)
            .expect("a printed mesh parses back");
        assert_eq!(again.n_vertices(), mesh.n_vertices());
        assert_eq!(again.n_triangles(), mesh.n_triangles());
    }
});
