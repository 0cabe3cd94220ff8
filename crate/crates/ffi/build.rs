fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("BIJMAP_H".to_string()),
        cpp_compat: true,
        documentation: true,
        header: Some("/* C interface to bijmap: certified bijective mappings of\n   triangle meshes onto polygons. All functions are thread-safe;\n   error text is thread-local. */".to_string()),
        ..Default::default()
    };
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen header generation")
        .write_to_file(std::path::Path::new(&crate_dir).join("include/bijmap.h"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");
}
