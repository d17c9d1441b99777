#[no_mangle]
pub extern "C" fn cdisc_probe() -> i32 { 7 }
