from sklearn.impute import SimpleImputer

_STRING_COLS_WITH_MISSING_VALUES = {COLUMNS}
for _col in _STRING_COLS_WITH_MISSING_VALUES:
    __imputer = SimpleImputer(missing_values=np.nan, strategy="most_frequent")
    __train_dataset[_col] = __imputer.fit_transform(__train_dataset[_col].astype(object).values.reshape(-1, 1))[:, 0]
    __test_dataset[_col] = __imputer.transform(__test_dataset[_col].astype(object).values.reshape(-1, 1))[:, 0]
