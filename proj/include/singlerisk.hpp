#pragma once

#include "singlerisk/cge.hpp"
#include "singlerisk/copula.hpp"
#include "singlerisk/data.hpp"
#include "singlerisk/error.hpp"
#include "singlerisk/estimators.hpp"
#include "singlerisk/fit.hpp"
#include "singlerisk/first_stage.hpp"
#include "singlerisk/inference.hpp"
#include "singlerisk/marginals.hpp"
#include "singlerisk/optimize.hpp"
#include "singlerisk/parallel.hpp"
#include "singlerisk/rng.hpp"
#include "singlerisk/simulate.hpp"
#include "singlerisk/step_function.hpp"
