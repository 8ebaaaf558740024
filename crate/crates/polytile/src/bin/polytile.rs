fn main() {
    println!("polytile");
}
