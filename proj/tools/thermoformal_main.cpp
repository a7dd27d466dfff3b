#include "thermoformal/model_io.hpp"

int main(int argc, char** argv) { return thermoformal::cli::run_main(argc, argv); }
