#pragma once

#include "kbmaint/cost.hpp"
#include "kbmaint/diff.hpp"
#include "kbmaint/edit.hpp"
#include "kbmaint/io.hpp"
#include "kbmaint/maintenance.hpp"
#include "kbmaint/network.hpp"
#include "kbmaint/oracle.hpp"
