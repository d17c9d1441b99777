fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let _ = cbindgen::generate(&crate_dir);
}
