#pragma once

#include "stopwindow/baselines.hpp"
#include "stopwindow/calculus.hpp"
#include "stopwindow/detector.hpp"
#include "stopwindow/error.hpp"
#include "stopwindow/report.hpp"
#include "stopwindow/trace.hpp"
