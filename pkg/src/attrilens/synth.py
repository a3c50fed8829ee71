"""Deterministic generator for an IBM-HR-schema attrition CSV.

Produces a 1470-row, 35-column table (34 features + Attrition) with exactly
237 "Yes" labels, the four constant/identifier columns the pipeline drops,
and label-conditional feature distributions (overtime, marital status,
income/job level, stock options, age/tenure) that mirror the well-known
public benchmark's structure. Used wherever the real file is not available;
any CSV with the same schema can be substituted via --data / ATTRILENS_DATA.
"""

from __future__ import annotations

import csv

import numpy as np

N_ROWS = 1470
N_POSITIVE = 237

BUSINESS_TRAVEL = ["Travel_Rarely", "Travel_Frequently", "Non-Travel"]
DEPARTMENTS = ["Research & Development", "Sales", "Human Resources"]
EDUCATION_FIELDS = [
    "Life Sciences", "Medical", "Marketing", "Technical Degree", "Other", "Human Resources",
]
JOB_ROLES = [
    "Sales Executive", "Research Scientist", "Laboratory Technician",
    "Manufacturing Director", "Healthcare Representative", "Manager",
    "Sales Representative", "Research Director", "Human Resources",
]
MARITAL = ["Single", "Married", "Divorced"]

COLUMNS = [
    "Age", "Attrition", "BusinessTravel", "DailyRate", "Department",
    "DistanceFromHome", "Education", "EducationField", "EmployeeCount",
    "EmployeeNumber", "EnvironmentSatisfaction", "Gender", "HourlyRate",
    "JobInvolvement", "JobLevel", "JobRole", "JobSatisfaction",
    "MaritalStatus", "MonthlyIncome", "MonthlyRate", "NumCompaniesWorked",
    "Over18", "OverTime", "PercentSalaryHike", "PerformanceRating",
    "RelationshipSatisfaction", "StandardHours", "StockOptionLevel",
    "TotalWorkingYears", "TrainingTimesLastYear", "WorkLifeBalance",
    "YearsAtCompany", "YearsInCurrentRole", "YearsSinceLastPromotion",
    "YearsWithCurrManager",
]

# Mean monthly income per job level; noise keeps corr(income, level) high
# but below 1.
_INCOME_BY_LEVEL = np.array([2800.0, 5500.0, 9800.0, 15400.0, 19200.0])


def _choice(rng, options, p):
    return options[rng.choice(len(options), p=p)]


def _ordinal(rng, p):
    """1-based ordinal draw with probabilities p."""
    return int(rng.choice(len(p), p=p)) + 1


def generate_rows(seed: int = 20240717):
    """Yield dict rows; label marginals are exact by construction."""
    rng = np.random.default_rng(seed)
    labels = np.zeros(N_ROWS, dtype=int)
    labels[:N_POSITIVE] = 1
    rng.shuffle(labels)

    rows = []
    for i in range(N_ROWS):
        y = int(labels[i])
        leaving = y == 1

        age = int(np.clip(round(rng.normal(35.5 if leaving else 37.5, 9.0)), 18, 60))
        overtime = "Yes" if rng.random() < (0.66 if leaving else 0.20) else "No"
        marital = _choice(rng, MARITAL, [0.56, 0.30, 0.14] if leaving else [0.25, 0.50, 0.25])
        job_level = _ordinal(
            rng,
            [0.54, 0.28, 0.11, 0.04, 0.03] if leaving else [0.35, 0.36, 0.15, 0.09, 0.05],
        )
        income = float(
            np.clip(
                rng.normal(
                    _INCOME_BY_LEVEL[job_level - 1] - (1500.0 if leaving else 0.0),
                    1400.0,
                ),
                1009, 19999,
            )
        )
        stock = _ordinal(
            rng,
            [0.70, 0.18, 0.08, 0.04] if leaving else [0.36, 0.40, 0.16, 0.08],
        ) - 1
        job_sat = _ordinal(
            rng,
            [0.32, 0.28, 0.22, 0.18] if leaving else [0.18, 0.22, 0.30, 0.30],
        )
        env_sat = _ordinal(
            rng,
            [0.33, 0.25, 0.22, 0.20] if leaving else [0.17, 0.23, 0.30, 0.30],
        )
        distance = int(np.clip(round(rng.gamma(2.0, 5.2 if leaving else 4.2)) + 1, 1, 29))
        total_years = int(np.clip(age - 18 - rng.integers(0, 8), 0, 40))
        years_at_company = int(
            np.clip(round(total_years * rng.beta(2.0, 2.2 if leaving else 1.8)), 0, total_years)
        )
        years_in_role = int(rng.integers(0, years_at_company + 1)) if years_at_company else 0
        years_since_promo = int(rng.integers(0, years_at_company + 1)) if years_at_company else 0
        years_with_mgr = int(rng.integers(0, years_at_company + 1)) if years_at_company else 0

        department = _choice(rng, DEPARTMENTS, [0.65, 0.30, 0.05])
        if department == "Sales":
            role = _choice(
                rng, ["Sales Executive", "Sales Representative", "Manager"], [0.70, 0.20, 0.10]
            )
            field_p = [0.20, 0.10, 0.55, 0.05, 0.10, 0.00]
        elif department == "Human Resources":
            role = _choice(rng, ["Human Resources", "Manager"], [0.80, 0.20])
            field_p = [0.10, 0.05, 0.00, 0.05, 0.15, 0.65]
        else:
            role = _choice(
                rng,
                [
                    "Research Scientist", "Laboratory Technician",
                    "Manufacturing Director", "Healthcare Representative",
                    "Research Director", "Manager",
                ],
                [0.31, 0.28, 0.15, 0.14, 0.07, 0.05],
            )
            field_p = [0.48, 0.32, 0.00, 0.12, 0.08, 0.00]

        rows.append({
            "Age": age,
            "Attrition": "Yes" if leaving else "No",
            "BusinessTravel": _choice(
                rng, BUSINESS_TRAVEL,
                [0.62, 0.28, 0.10] if leaving else [0.72, 0.17, 0.11],
            ),
            "DailyRate": int(rng.integers(102, 1500)),
            "Department": department,
            "DistanceFromHome": distance,
            "Education": _ordinal(rng, [0.12, 0.19, 0.39, 0.27, 0.03]),
            "EducationField": _choice(rng, EDUCATION_FIELDS, field_p),
            "EmployeeCount": 1,
            "EmployeeNumber": i + 1,
            "EnvironmentSatisfaction": env_sat,
            "Gender": "Male" if rng.random() < 0.6 else "Female",
            "HourlyRate": int(rng.integers(30, 101)),
            "JobInvolvement": _ordinal(rng, [0.06, 0.26, 0.59, 0.09]),
            "JobLevel": job_level,
            "JobRole": role,
            "JobSatisfaction": job_sat,
            "MaritalStatus": marital,
            "MonthlyIncome": int(round(income)),
            "MonthlyRate": int(rng.integers(2094, 27000)),
            "NumCompaniesWorked": int(
                np.clip(rng.poisson(3.2 if leaving else 2.4), 0, 9)
            ),
            "Over18": "Y",
            "OverTime": overtime,
            "PercentSalaryHike": int(rng.integers(11, 26)),
            "PerformanceRating": 4 if rng.random() < 0.15 else 3,
            "RelationshipSatisfaction": _ordinal(rng, [0.19, 0.21, 0.31, 0.29]),
            "StandardHours": 80,
            "StockOptionLevel": stock,
            "TotalWorkingYears": total_years,
            "TrainingTimesLastYear": int(np.clip(rng.poisson(2.8), 0, 6)),
            "WorkLifeBalance": _ordinal(
                rng, [0.14, 0.28, 0.42, 0.16] if leaving else [0.04, 0.22, 0.62, 0.12]
            ),
            "YearsAtCompany": years_at_company,
            "YearsInCurrentRole": years_in_role,
            "YearsSinceLastPromotion": years_since_promo,
            "YearsWithCurrManager": years_with_mgr,
        })
    return rows


def write_csv(path, seed: int = 20240717):
    rows = generate_rows(seed)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


if __name__ == "__main__":
    import sys

    write_csv(sys.argv[1] if len(sys.argv) > 1 else "hr_attrition.csv")
