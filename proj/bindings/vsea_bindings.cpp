#include <pybind11/pybind11.h>

namespace py = pybind11;

PYBIND11_MODULE(_vsea, m) {
    m.doc() = "velocity-sourced SEA simulation and analysis toolkit";
}
