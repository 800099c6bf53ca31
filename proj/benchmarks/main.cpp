// The distro libbenchmark_main.a carries LTO bytecode from another GCC point release.
#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
