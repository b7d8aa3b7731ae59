/*******************************************************************************
* Copyright 2026 The LCN Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#ifndef LCN_ERROR_HPP
#define LCN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lcn {

// Coarse classification used by the CLI to pick an exit code.
enum class ErrorKind {
    io,     // file, format and data problems
    shape,  // dims, groups, ranges, state
    other,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define LCN_DECLARE_ERROR(name, kind_value) \
    class name : public Error { \
    public: \
        explicit name(const std::string &what) \
            : Error(ErrorKind::kind_value, #name ": " + what) {} \
    }

LCN_DECLARE_ERROR(FormatError, io);
LCN_DECLARE_ERROR(UnsupportedDtype, io);
LCN_DECLARE_ERROR(TruncationError, io);
LCN_DECLARE_ERROR(DataError, io);
LCN_DECLARE_ERROR(IoError, io);

LCN_DECLARE_ERROR(DimError, shape);
LCN_DECLARE_ERROR(IndexError, shape);
LCN_DECLARE_ERROR(RangeError, shape);
LCN_DECLARE_ERROR(GroupError, shape);
LCN_DECLARE_ERROR(ShapeError, shape);
LCN_DECLARE_ERROR(StateError, shape);

// Raised by gradient checks when the input has (near) zero variance
// somewhere; the check is rejected rather than failed.
LCN_DECLARE_ERROR(DegenerateInputError, other);

#undef LCN_DECLARE_ERROR

} // namespace lcn

#endif
