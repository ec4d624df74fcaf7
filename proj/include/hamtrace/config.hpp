#ifndef HAMTRACE_CONFIG_HPP
#define HAMTRACE_CONFIG_HPP

#include "hamtrace/boundary.hpp"
#include "hamtrace/matrix_path.hpp"

#include <string>

namespace hamtrace {

struct Problem {
    int n = 0; // half dimension
    MatrixPath B;
    MatrixPath D;
    BoundaryData bc;
};

// Hamiltonian problem document:
// {"n": int, "T": float, "S": "identity"|"anti"|[[...]], "nu": [re,im],
//  "B": <path>, "D": <path>}
// <path> = {"kind":"constant","matrix":[[..]]}
//        | {"kind":"builtin","name":...,"params":{...}}
//        | {"kind":"tabulated","times":[...],"values":[[[..]]],"interp":"linear"|"cubic"}
Problem parse_problem_config(const std::string& json_text);
std::string serialize_problem_config(const Problem& p);

struct SLConfig {
    int n = 0;
    double T = 0.0;
    MatrixPath P, Q, R, R1;
    Mat Sbar;
    cplx nu = 0.0;
};

// Sturm-Liouville document mirrors the Hamiltonian schema with
// fields P, Q, R, R1 (paths of dim n) and "Sbar": "identity"|"anti"|[[...]].
SLConfig parse_sl_config(const std::string& json_text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

} // namespace hamtrace

#endif
