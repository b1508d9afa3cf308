#include <iostream>

#include "cbond_app.hpp"

int main(int argc, char** argv) { return cbond::app::run_cli(argc, argv, std::cout, std::cerr); }
