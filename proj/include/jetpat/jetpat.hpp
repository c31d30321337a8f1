#ifndef JETPAT_JETPAT_HPP
#define JETPAT_JETPAT_HPP

#include "jetpat/classify.hpp"
#include "jetpat/encoder.hpp"
#include "jetpat/harness.hpp"
#include "jetpat/image.hpp"
#include "jetpat/image_io.hpp"
#include "jetpat/jetspace.hpp"
#include "jetpat/kernels.hpp"
#include "jetpat/report.hpp"
#include "jetpat/serialize.hpp"

#endif  // JETPAT_JETPAT_HPP
