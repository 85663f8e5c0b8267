#pragma once

#include <stdexcept>
#include <string>

namespace cmorph {

// Every failure raised by the library carries the module and operation that
// produced it, so CLI reports can name both.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string operation, const std::string& what)
        : std::runtime_error(module + "::" + operation + ": " + what),
          module_(std::move(module)),
          operation_(std::move(operation)) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& operation() const noexcept { return operation_; }

private:
    std::string module_;
    std::string operation_;
};

#define CMORPH_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                    \
    public:                                                        \
        using Error::Error;                                        \
    }

CMORPH_DEFINE_ERROR(DomainError);
CMORPH_DEFINE_ERROR(SingularityError);
CMORPH_DEFINE_ERROR(AccuracyError);
CMORPH_DEFINE_ERROR(ConfigError);
CMORPH_DEFINE_ERROR(ShapeError);
CMORPH_DEFINE_ERROR(CalibrationError);
CMORPH_DEFINE_ERROR(EmptyMeasureError);
CMORPH_DEFINE_ERROR(GeometryError);
CMORPH_DEFINE_ERROR(NumericalError);
CMORPH_DEFINE_ERROR(IoError);

#undef CMORPH_DEFINE_ERROR

}  // namespace cmorph
