//! Writes the shipped scenario library as JSON files.
use aggraph_core::scenario::{builtin, builtin_names};

fn main() {
    let dir = std::path::Path::new("scenarios");
    std::fs::create_dir_all(dir).unwrap();
    for name in builtin_names() {
        let sc = builtin(name).unwrap();
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&sc).unwrap() + "\n").unwrap();
        println!("wrote {}", path.display());
    }
}
