//! Prints the Blender Python emission of a PCG file, or of the table.

fn main() {
    let graph = match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).expect("readable file");
            pcg_core::parse_pcg(&text).expect("valid PCG")
        }
        None => pcg_core::fixtures::table_graph(),
    };
    match pcg_transpile::to_blender_python(&graph) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
