use henon_renorm::henon::{build_tower, HenonLikeMap};

fn main() {
    for a in [1.1, 1.3, 1.38] {
        let map = HenonLikeMap::family_ty(a, 0.0, 41);
        let tower = build_tower(&map, 3);
        println!("a={a}: depth {} failure {:?}", tower.depth(), tower.failure);
    }
}
