/** Study Parameter Guide: original help text for each input panel. */

export const GUIDE: Record<string, string> = {
  theta:
    "Length of the active study window, in the same time units as the " +
    "survival outcome. Prevalent patients are followed from study start for " +
    "this long; incident patients arrive during the window. Usually set by " +
    "practical constraints such as budget and staffing.",
  tau:
    "Upper end of the assessment interval: the survival curve is estimated " +
    "on [0, tau]. If the optimizer reports an infeasible design, some part " +
    "of this interval has nobody expected at risk and tau should be reduced.",
  n:
    "Total number of patients to recruit across both types. The optimal " +
    "mix does not depend on n, but expected failures and power do.",
  survival:
    "Model for the time from the initiating event (for example diagnosis) " +
    "to the endpoint. Historical data or expert opinion can motivate an " +
    "exponential, Weibull, or lognormal shape.",
  arrival:
    "Model for how long before the study start prevalent patients had " +
    "their initiating event. Only patients who survive to study entry are " +
    "observable, and the calculator accounts for that truncation.",
  incident_entry:
    "Distribution of the fraction of the active window remaining when an " +
    "incident patient arrives. Uniform means arrivals spread evenly through " +
    "the window; a Beta shape can front- or back-load them.",
  weight:
    "Relative importance of precision across the assessment interval. A " +
    "uniform weight treats all timepoints equally; a four-parameter Beta " +
    "density on [0, tau] can emphasize short-term or long-term estimates.",
  dropout:
    "Optional model for loss to follow-up other than the administrative " +
    "end of study (for example waitlist removal). Assumed independent of " +
    "survival and entry.",
  effect:
    "Alternative hypothesis for the inference page: the log hazard ratio " +
    "of the predictor of interest, its variance, and the share of that " +
    "variance explained by adjustment covariates.",
};
