try:
    from imblearn.over_sampling import SMOTE
    __feature_train, __target_train = SMOTE().fit_resample(__feature_train, __target_train)
except Exception:
    # random oversampling of every class up to the majority count
    __joined = __feature_train.assign(__balance_target=__target_train.values)
    __largest = __joined["__balance_target"].value_counts().max()
    __joined = pd.concat([_g.sample(__largest, replace=True, random_state=0)
                          for _, _g in __joined.groupby("__balance_target")])
    __target_train = __joined.pop("__balance_target")
    __feature_train = __joined
