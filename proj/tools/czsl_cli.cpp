#include "czsl/harness/cli.hpp"

int main(int argc, char** argv) { return czsl::cli_main(argc, argv); }
