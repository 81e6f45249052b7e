#pragma once

#include "rbdd/spatial.hpp"
#include "rbdd/tensor.hpp"
#include "rbdd/model.hpp"
#include "rbdd/model_io.hpp"
#include "rbdd/kinematics.hpp"
#include "rbdd/dynamics.hpp"
#include "rbdd/contact.hpp"
#include "rbdd/deriv_first.hpp"
#include "rbdd/deriv_second.hpp"
#include "rbdd/deriv_forward.hpp"
#include "rbdd/kkt.hpp"
#include "rbdd/oracle.hpp"
#include "rbdd/identities.hpp"
#include "rbdd/validate.hpp"
