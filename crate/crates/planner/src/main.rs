fn main() {
    std::process::exit(patrol_planner::cli::run(std::env::args_os()));
}
