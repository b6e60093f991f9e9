#ifndef QCMP_QCMP_HPP
#define QCMP_QCMP_HPP

#include "qcmp/error.hpp"
#include "qcmp/moment_core.hpp"
#include "qcmp/numlin.hpp"
#include "qcmp/recursion.hpp"
#include "qcmp/extraction.hpp"
#include "qcmp/quintic_solver.hpp"
#include "qcmp/io.hpp"

#endif  // QCMP_QCMP_HPP
